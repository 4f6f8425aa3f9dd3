//! Social care: friend graph, groups, posts and reactions, the news feed,
//! messages, messages of the day and friend suggestions.
//!
//! Knowledge items are verified content published by educators and
//! clinicians. Forum threads and statuses come from anyone and are never
//! verified. Patients interact with knowledge only by asking questions
//! attached to an existing item.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use crate::clinic::{Actor, Clinic};
use crate::eho::{Action, Role, SubModule};
use crate::error::{ClinicError, Result};
use crate::ids::Id;
use crate::notify::NotificationKind;
use crate::store::{Batch, Document};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConnectionState {
    Pending,
    Accepted,
    Declined,
    Removed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConnectionVerb {
    Request,
    Accept,
    Decline,
    Unfriend,
}

/// Friendship between an unordered pair; `a < b` always.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub a: Id,
    pub b: Id,
    pub state: ConnectionState,
    pub requested_by: Id,
    pub updated_at: DateTime<Utc>,
}

fn pair_key(x: &Id, y: &Id) -> String {
    if x < y {
        format!("{x}|{y}")
    } else {
        format!("{y}|{x}")
    }
}

impl Document for Connection {
    const COLLECTION: &'static str = "connections";
    fn key(&self) -> String {
        pair_key(&self.a, &self.b)
    }
}

impl Connection {
    pub fn other(&self, me: &Id) -> &Id {
        if &self.a == me {
            &self.b
        } else {
            &self.a
        }
    }
}

/// Pure transition function of the connection state machine.
/// `current` is `None` when the pair has no record yet.
pub fn connection_transition(
    current: Option<(ConnectionState, &Id)>,
    actor: &Id,
    verb: ConnectionVerb,
) -> std::result::Result<(ConnectionState, Option<Id>), String> {
    use ConnectionState::*;
    use ConnectionVerb::*;
    match (current, verb) {
        (None | Some((Declined | Removed, _)), Request) => Ok((Pending, Some(actor.clone()))),
        (Some((Pending, requester)), Accept) if requester != actor => Ok((Accepted, None)),
        (Some((Pending, requester)), Decline) if requester != actor => Ok((Declined, None)),
        (Some((Accepted, _)), Unfriend) => Ok((Removed, None)),
        (state, verb) => Err(format!("{verb:?} not allowed from {:?}", state.map(|s| s.0))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PostKind {
    Status,
    ForumThread,
    ForumReply,
    Comment,
    KnowledgeItem,
    KnowledgeQuestion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: Id,
    pub author: Id,
    pub kind: PostKind,
    pub parent: Option<Id>,
    pub body: String,
    pub group: Option<Id>,
    pub verified: bool,
    pub likes: BTreeSet<Id>,
    pub created_at: DateTime<Utc>,
}

impl Document for Post {
    const COLLECTION: &'static str = "posts";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub id: Id,
    pub name: String,
    pub members: BTreeSet<Id>,
    pub moderators: BTreeSet<Id>,
    pub created_at: DateTime<Utc>,
}

impl Document for Group {
    const COLLECTION: &'static str = "groups";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GroupName {
    name: String,
    group: Id,
}

impl Document for GroupName {
    const COLLECTION: &'static str = "group_names";
    fn key(&self) -> String {
        self.name.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Motd {
    pub id: Id,
    pub user: Id,
    pub message: String,
    pub set_by: Id,
    pub effective_at: DateTime<Utc>,
}

impl Document for Motd {
    const COLLECTION: &'static str = "motd";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageKind {
    Direct,
    /// An online consultation thread, closed when the clinician records the outcome.
    Consultation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: Id,
    pub from: Id,
    pub to: Id,
    pub body: String,
    pub kind: MessageKind,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub closed_by: Option<Id>,
}

impl Document for Message {
    const COLLECTION: &'static str = "messages";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SocialEvent {
    pub id: Id,
    pub organizer: Id,
    pub title: String,
    pub starts_at: DateTime<Utc>,
    pub group: Option<Id>,
    pub created_at: DateTime<Utc>,
}

impl Document for SocialEvent {
    const COLLECTION: &'static str = "events";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileChange {
    pub id: Id,
    pub subject: Id,
    pub created_at: DateTime<Utc>,
}

impl Document for ProfileChange {
    const COLLECTION: &'static str = "profile_changes";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeedKind {
    StatusPosted,
    ProfileChanged,
    UpcomingEvent,
    Birthday,
    GroupPost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedItem {
    pub subject: Id,
    pub kind: FeedKind,
    pub ref_id: Id,
    pub group: Option<Id>,
    pub created_at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub user: Id,
    pub shared_groups: usize,
    pub mutual_friends: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchResults {
    pub users: Vec<crate::accounts::UserSummary>,
    pub posts: Vec<Post>,
    pub knowledge: Vec<Post>,
}

/// Read-only snapshot of the social graph used by visibility and feed checks.
pub(crate) struct Graph {
    friends: BTreeMap<Id, BTreeSet<Id>>,
    pending: HashSet<(Id, Id)>,
    groups: BTreeMap<Id, Group>,
}

impl Graph {
    pub(crate) fn friends_of(&self, id: &Id) -> BTreeSet<Id> {
        self.friends.get(id).cloned().unwrap_or_default()
    }

    fn is_friend(&self, a: &Id, b: &Id) -> bool {
        self.friends.get(a).is_some_and(|f| f.contains(b))
    }

    fn member(&self, group: &Id, user: &Id) -> bool {
        self.groups.get(group).is_some_and(|g| g.members.contains(user))
    }

    fn groups_of(&self, user: &Id) -> BTreeSet<Id> {
        self.groups.values().filter(|g| g.members.contains(user)).map(|g| g.id.clone()).collect()
    }
}

impl Clinic {
    pub(crate) fn graph(&self) -> Result<Graph> {
        let mut friends: BTreeMap<Id, BTreeSet<Id>> = BTreeMap::new();
        let mut pending = HashSet::new();
        for c in self.store.scan::<Connection>()? {
            let c = c.value;
            match c.state {
                ConnectionState::Accepted => {
                    friends.entry(c.a.clone()).or_default().insert(c.b.clone());
                    friends.entry(c.b.clone()).or_default().insert(c.a.clone());
                }
                ConnectionState::Pending => {
                    pending.insert((c.a.clone(), c.b.clone()));
                }
                _ => {}
            }
        }
        let groups = self.store.scan::<Group>()?.into_iter().map(|g| (g.value.id.clone(), g.value)).collect();
        Ok(Graph { friends, pending, groups })
    }

    pub fn are_friends(&self, a: &Id, b: &Id) -> Result<bool> {
        Ok(self
            .store
            .get::<Connection>(&pair_key(a, b))?
            .is_some_and(|c| c.value.state == ConnectionState::Accepted))
    }

    pub fn friends(&self, user: &Id) -> Result<BTreeSet<Id>> {
        Ok(self.graph()?.friends_of(user))
    }

    pub fn connection(&self, a: &Id, b: &Id) -> Result<Option<Connection>> {
        Ok(self.store.get::<Connection>(&pair_key(a, b))?.map(|v| v.value))
    }

    pub fn manage_connection(&self, actor: &Actor, target: &Id, verb: ConnectionVerb) -> Result<Connection> {
        if &actor.id == target {
            return Err(ClinicError::SelfConnection);
        }
        self.account(target)?;
        self.gate(actor, "connection", Some(target), true, "connection.participant")?;
        self.retrying(|| {
            let key = pair_key(&actor.id, target);
            let current = self.store.get::<Connection>(&key)?;
            let (state, requester) = connection_transition(
                current.as_ref().map(|c| (c.value.state, &c.value.requested_by)),
                &actor.id,
                verb,
            )
            .map_err(ClinicError::IllegalTransition)?;
            let (a, b) = if &actor.id < target { (actor.id.clone(), target.clone()) } else { (target.clone(), actor.id.clone()) };
            let conn = Connection {
                a,
                b,
                state,
                requested_by: requester
                    .or_else(|| current.as_ref().map(|c| c.value.requested_by.clone()))
                    .unwrap_or_else(|| actor.id.clone()),
                updated_at: self.now(),
            };
            let mut batch = Batch::new();
            batch.put(&conn, current.map_or(0, |c| c.version));
            if verb == ConnectionVerb::Request {
                self.notify(&mut batch, target, NotificationKind::FriendRequest, &actor.id);
            }
            self.store.commit(batch)?;
            Ok(conn)
        })
    }

    pub fn connections_of(&self, user: &Id) -> Result<Vec<Connection>> {
        Ok(self
            .store
            .scan::<Connection>()?
            .into_iter()
            .map(|c| c.value)
            .filter(|c| &c.a == user || &c.b == user)
            .collect())
    }

    pub fn create_group(&self, actor: &Actor, name: &str) -> Result<Group> {
        let name = name.trim();
        if name.is_empty() {
            return Err(ClinicError::Validation("group name must not be empty".into()));
        }
        self.gate(actor, "group.create", None, true, "group.open")?;
        let group = Group {
            id: self.next_id(),
            name: name.to_owned(),
            members: BTreeSet::from([actor.id.clone()]),
            moderators: BTreeSet::from([actor.id.clone()]),
            created_at: self.now(),
        };
        let mut batch = Batch::new();
        batch.insert(&GroupName { name: name.to_lowercase(), group: group.id.clone() });
        batch.insert(&group);
        self.store
            .commit(batch)
            .map_err(|_| ClinicError::Validation(format!("group `{name}` already exists")))?;
        Ok(group)
    }

    pub fn group(&self, id: &Id) -> Result<Group> {
        self.store
            .get::<Group>(&id.0)?
            .map(|g| g.value)
            .ok_or_else(|| ClinicError::NotFound("group", id.0.clone()))
    }

    pub fn group_by_name(&self, name: &str) -> Result<Option<Group>> {
        match self.store.get::<GroupName>(&name.trim().to_lowercase())? {
            Some(n) => Ok(Some(self.group(&n.value.group)?)),
            None => Ok(None),
        }
    }

    pub fn groups(&self) -> Result<Vec<Group>> {
        Ok(self.store.scan::<Group>()?.into_iter().map(|g| g.value).collect())
    }

    /// Opt-in membership. Joining twice is a no-op.
    pub fn join_group(&self, actor: &Actor, group: &Id) -> Result<Group> {
        self.gate(actor, "group.join", Some(group), true, "group.open")?;
        self.update_group(group, |g| {
            g.members.insert(actor.id.clone());
            Ok(())
        })
    }

    pub fn leave_group(&self, actor: &Actor, group: &Id) -> Result<Group> {
        self.gate(actor, "group.leave", Some(group), true, "group.open")?;
        self.update_group(group, |g| {
            g.members.remove(&actor.id);
            g.moderators.remove(&actor.id);
            Ok(())
        })
    }

    fn update_group(&self, id: &Id, mut edit: impl FnMut(&mut Group) -> Result<()>) -> Result<Group> {
        self.retrying(|| {
            let current = self
                .store
                .get::<Group>(&id.0)?
                .ok_or_else(|| ClinicError::NotFound("group", id.0.clone()))?;
            let mut group = current.value;
            edit(&mut group)?;
            let mut batch = Batch::new();
            batch.put(&group, current.version);
            self.store.commit(batch)?;
            Ok(group)
        })
    }

    pub(crate) fn post_visible(&self, graph: &Graph, viewer: &Id, post: &Post) -> Result<bool> {
        if &post.author == viewer {
            return Ok(true);
        }
        if let Some(group) = &post.group {
            return Ok(graph.member(group, viewer));
        }
        match post.kind {
            PostKind::Status => Ok(graph.is_friend(&post.author, viewer)),
            PostKind::ForumThread | PostKind::ForumReply | PostKind::KnowledgeItem | PostKind::KnowledgeQuestion => {
                Ok(true)
            }
            PostKind::Comment => match &post.parent {
                Some(parent) => match self.store.get::<Post>(&parent.0)? {
                    Some(p) => self.post_visible(graph, viewer, &p.value),
                    None => Ok(false),
                },
                None => Ok(false),
            },
        }
    }

    pub fn get_post(&self, actor: &Actor, id: &Id) -> Result<Post> {
        let post = self
            .store
            .get::<Post>(&id.0)?
            .ok_or_else(|| ClinicError::NotFound("post", id.0.clone()))?
            .value;
        if !self.post_visible(&self.graph()?, &actor.id, &post)? {
            return Err(ClinicError::NotVisible);
        }
        Ok(post)
    }

    pub fn post(
        &self,
        actor: &Actor,
        kind: PostKind,
        body: &str,
        parent: Option<&Id>,
        group: Option<&Id>,
    ) -> Result<Post> {
        if body.trim().is_empty() {
            return Err(ClinicError::EmptyBody);
        }
        let parent_post = match parent {
            Some(id) => Some(self.store.get::<Post>(&id.0)?.ok_or(ClinicError::MissingParent)?.value),
            None => None,
        };
        let parent_kind = parent_post.as_ref().map(|p| p.kind);
        let parent_ok = match kind {
            PostKind::Status | PostKind::ForumThread | PostKind::KnowledgeItem => parent_kind.is_none(),
            PostKind::Comment => parent_kind.is_some(),
            PostKind::ForumReply => matches!(parent_kind, Some(PostKind::ForumThread | PostKind::ForumReply)),
            PostKind::KnowledgeQuestion => parent_kind == Some(PostKind::KnowledgeItem),
        };
        if !parent_ok {
            return Err(ClinicError::MissingParent);
        }
        match kind {
            PostKind::KnowledgeItem => self.require(actor, &actor.id, SubModule::KM, Action::Create, None)?,
            PostKind::KnowledgeQuestion => {
                let d = self.authorize(actor, &actor.id, SubModule::KM, Action::Request, None)?;
                if !d.permits() {
                    return Err(ClinicError::PermissionDenied(d.reason));
                }
            }
            _ => self.require(actor, &actor.id, SubModule::CS, Action::Create, None)?,
        }
        let graph = self.graph()?;
        if let Some(p) = &parent_post {
            if !self.post_visible(&graph, &actor.id, p)? {
                return Err(ClinicError::NotVisible);
            }
        }
        if let Some(g) = group {
            if !graph.groups.contains_key(g) {
                return Err(ClinicError::NotFound("group", g.0.clone()));
            }
            self.gate(actor, "group.post", Some(g), graph.member(g, &actor.id), "group.members-only")?;
        }
        let post = Post {
            id: self.next_id(),
            author: actor.id.clone(),
            kind,
            parent: parent.cloned(),
            body: body.to_owned(),
            group: group.cloned(),
            verified: kind == PostKind::KnowledgeItem
                && matches!(actor.role, Role::HealthEducator | Role::Clinician),
            likes: BTreeSet::new(),
            created_at: self.now(),
        };
        let mut batch = Batch::new();
        batch.insert(&post);
        self.store.commit(batch)?;
        Ok(post)
    }

    /// Like a post. Liking again is a no-op; returns the like count.
    pub fn react(&self, actor: &Actor, post: &Id) -> Result<usize> {
        let graph = self.graph()?;
        self.retrying(|| {
            let current = self
                .store
                .get::<Post>(&post.0)?
                .ok_or_else(|| ClinicError::NotFound("post", post.0.clone()))?;
            if !self.post_visible(&graph, &actor.id, &current.value)? {
                return Err(ClinicError::NotVisible);
            }
            let mut p = current.value;
            if p.likes.insert(actor.id.clone()) {
                let mut batch = Batch::new();
                batch.put(&p, current.version);
                self.store.commit(batch)?;
            }
            Ok(p.likes.len())
        })
    }

    pub fn create_event(&self, actor: &Actor, title: &str, starts_at: DateTime<Utc>, group: Option<&Id>) -> Result<SocialEvent> {
        if title.trim().is_empty() {
            return Err(ClinicError::EmptyBody);
        }
        if let Some(g) = group {
            let member = self.group(g)?.members.contains(&actor.id);
            self.gate(actor, "event.create", Some(g), member, "group.members-only")?;
        }
        let event = SocialEvent {
            id: self.next_id(),
            organizer: actor.id.clone(),
            title: title.to_owned(),
            starts_at,
            group: group.cloned(),
            created_at: self.now(),
        };
        let mut batch = Batch::new();
        batch.insert(&event);
        self.store.commit(batch)?;
        Ok(event)
    }

    /// Feed for `viewer`, computed on read: friends' and own statuses,
    /// posts in the viewer's groups, profile changes, upcoming events and
    /// today's birthdays. Ordered by (created_at, ref id) descending, one
    /// item per referenced object.
    pub fn build_feed(&self, viewer: &Actor, limit: usize) -> Result<Vec<FeedItem>> {
        let graph = self.graph()?;
        let me = &viewer.id;
        let mut circle = graph.friends_of(me);
        circle.insert(me.clone());
        let my_groups = graph.groups_of(me);
        let now = self.now();
        let mut items = Vec::new();

        for p in self.store.scan::<Post>()? {
            let p = p.value;
            match (&p.group, p.kind) {
                (None, PostKind::Status) if circle.contains(&p.author) => items.push(FeedItem {
                    subject: p.author.clone(),
                    kind: FeedKind::StatusPosted,
                    ref_id: p.id.clone(),
                    group: None,
                    created_at: p.created_at,
                }),
                (Some(g), PostKind::Status | PostKind::ForumThread) if my_groups.contains(g) => {
                    let kind = if circle.contains(&p.author) && p.kind == PostKind::Status {
                        FeedKind::StatusPosted
                    } else {
                        FeedKind::GroupPost
                    };
                    if kind == FeedKind::StatusPosted {
                        // reachable both via friendship and via the group
                        items.push(FeedItem { subject: p.author.clone(), kind, ref_id: p.id.clone(), group: Some(g.clone()), created_at: p.created_at });
                    }
                    items.push(FeedItem {
                        subject: p.author.clone(),
                        kind: FeedKind::GroupPost,
                        ref_id: p.id.clone(),
                        group: Some(g.clone()),
                        created_at: p.created_at,
                    });
                }
                _ => {}
            }
        }
        for c in self.store.scan::<ProfileChange>()? {
            let c = c.value;
            if circle.contains(&c.subject) {
                items.push(FeedItem { subject: c.subject, kind: FeedKind::ProfileChanged, ref_id: c.id, group: None, created_at: c.created_at });
            }
        }
        for e in self.store.scan::<SocialEvent>()? {
            let e = e.value;
            let audience = match &e.group {
                Some(g) => my_groups.contains(g),
                None => circle.contains(&e.organizer),
            };
            if audience && e.starts_at >= now {
                items.push(FeedItem { subject: e.organizer, kind: FeedKind::UpcomingEvent, ref_id: e.id, group: e.group, created_at: e.created_at });
            }
        }
        let today = now.date_naive();
        for friend in graph.friends_of(me) {
            let account = self.account(&friend)?;
            if let Some(b) = account.profile.birthday {
                if b.month() == today.month() && b.day() == today.day() {
                    let midnight = today.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc();
                    items.push(FeedItem { subject: friend.clone(), kind: FeedKind::Birthday, ref_id: friend, group: None, created_at: midnight });
                }
            }
        }

        items.sort_by(|x, y| (y.created_at, &y.ref_id, y.kind as u8).cmp(&(x.created_at, &x.ref_id, x.kind as u8)));
        let mut seen = HashSet::new();
        items.retain(|i| seen.insert(i.ref_id.clone()));
        items.truncate(limit);
        Ok(items)
    }

    pub fn set_motd(&self, actor: &Actor, user: &Id, message: &str, effective_at: DateTime<Utc>) -> Result<Motd> {
        self.gate(actor, "motd.set", Some(user), actor.role == Role::HealthEducator, "motd.educator-only")?;
        if message.trim().is_empty() {
            return Err(ClinicError::EmptyBody);
        }
        self.account(user)?;
        let motd = Motd {
            id: self.next_id(),
            user: user.clone(),
            message: message.to_owned(),
            set_by: actor.id.clone(),
            effective_at,
        };
        let mut batch = Batch::new();
        batch.insert(&motd);
        self.notify(&mut batch, user, NotificationKind::MotdUpdated, &motd.id);
        self.store.commit(batch)?;
        Ok(motd)
    }

    /// The message of the day in force for `user` at `at`: the one with the
    /// latest `effective_at <= at`, ties going to the later id.
    pub fn motd_at(&self, user: &Id, at: DateTime<Utc>) -> Result<Option<Motd>> {
        Ok(self
            .store
            .scan::<Motd>()?
            .into_iter()
            .map(|m| m.value)
            .filter(|m| &m.user == user && m.effective_at <= at)
            .max_by(|a, b| (a.effective_at, &a.id).cmp(&(b.effective_at, &b.id))))
    }

    pub fn get_motd(&self, actor: &Actor) -> Result<Option<Motd>> {
        self.motd_at(&actor.id, self.now())
    }

    pub fn send_message(&self, actor: &Actor, to: &Id, body: &str, kind: MessageKind) -> Result<Message> {
        if body.trim().is_empty() {
            return Err(ClinicError::EmptyBody);
        }
        if self.store.get::<crate::accounts::UserAccount>(&to.0)?.is_none() {
            return Err(ClinicError::UnknownRecipient(to.0.clone()));
        }
        self.gate(actor, "message.send", Some(to), true, "message.any-user")?;
        let msg = Message {
            id: self.next_id(),
            from: actor.id.clone(),
            to: to.clone(),
            body: body.to_owned(),
            kind,
            created_at: self.now(),
            closed_by: None,
        };
        let mut batch = Batch::new();
        batch.insert(&msg);
        self.notify(&mut batch, to, NotificationKind::NewMessage, &msg.id);
        self.store.commit(batch)?;
        Ok(msg)
    }

    /// Messages received by the actor, newest first.
    pub fn list_inbox(&self, actor: &Actor) -> Result<Vec<Message>> {
        let mut out: Vec<Message> = self
            .store
            .scan::<Message>()?
            .into_iter()
            .map(|m| m.value)
            .filter(|m| m.to == actor.id)
            .collect();
        out.sort_by(|a, b| (b.created_at, &b.id).cmp(&(a.created_at, &a.id)));
        Ok(out)
    }

    pub fn get_message(&self, actor: &Actor, id: &Id) -> Result<Message> {
        let msg = self
            .store
            .get::<Message>(&id.0)?
            .ok_or_else(|| ClinicError::NotFound("message", id.0.clone()))?
            .value;
        if msg.from != actor.id && msg.to != actor.id {
            return Err(ClinicError::NotVisible);
        }
        Ok(msg)
    }

    /// Both directions between `a` and `b`, oldest first. Only `a` or `b` may look.
    pub fn thread(&self, actor: &Actor, a: &Id, b: &Id) -> Result<Vec<Message>> {
        if &actor.id != a && &actor.id != b {
            return Err(ClinicError::NotVisible);
        }
        let mut out: Vec<Message> = self
            .store
            .scan::<Message>()?
            .into_iter()
            .map(|m| m.value)
            .filter(|m| (&m.from == a && &m.to == b) || (&m.from == b && &m.to == a))
            .collect();
        out.sort_by(|x, y| (x.created_at, &x.id).cmp(&(y.created_at, &y.id)));
        Ok(out)
    }

    /// Non-friends ranked by shared groups, then mutual friends, then id.
    /// Self, friends and pending requests in either direction are excluded.
    pub fn suggest_friends(&self, actor: &Actor, k: usize) -> Result<Vec<Suggestion>> {
        let graph = self.graph()?;
        let me = &actor.id;
        let my_friends = graph.friends_of(me);
        let my_groups = graph.groups_of(me);
        let mut out: Vec<Suggestion> = self
            .accounts()?
            .into_iter()
            .map(|a| a.id)
            .filter(|u| u != me && !my_friends.contains(u))
            .filter(|u| {
                let key = if me < u { (me.clone(), u.clone()) } else { (u.clone(), me.clone()) };
                !graph.pending.contains(&key)
            })
            .map(|u| Suggestion {
                shared_groups: graph.groups_of(&u).intersection(&my_groups).count(),
                mutual_friends: graph.friends_of(&u).intersection(&my_friends).count(),
                user: u,
            })
            .collect();
        out.sort_by(|a, b| {
            (b.shared_groups, b.mutual_friends)
                .cmp(&(a.shared_groups, a.mutual_friends))
                .then_with(|| a.user.cmp(&b.user))
        });
        out.truncate(k);
        Ok(out)
    }

    /// Case-insensitive substring search over user names, visible posts and knowledge items.
    pub fn search(&self, actor: &Actor, query: &str) -> Result<SearchResults> {
        let q = query.trim().to_lowercase();
        if q.is_empty() {
            return Ok(SearchResults::default());
        }
        let graph = self.graph()?;
        let mut results = SearchResults { users: self.find_users(&q)?, ..Default::default() };
        for p in self.store.scan::<Post>()? {
            let p = p.value;
            if !p.body.to_lowercase().contains(&q) || !self.post_visible(&graph, &actor.id, &p)? {
                continue;
            }
            if matches!(p.kind, PostKind::KnowledgeItem | PostKind::KnowledgeQuestion) {
                results.knowledge.push(p);
            } else {
                results.posts.push(p);
            }
        }
        Ok(results)
    }
}
