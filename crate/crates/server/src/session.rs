//! Per-user sessions with idle expiry and replayable replies.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant, SystemTime};

use axum::http::StatusCode;
use parking_lot::Mutex;
use serde_json::Value;
use sketchsearch::classifier::ElementPrediction;
use sketchsearch::query::CanvasState;
use sketchsearch::search::Ranking;

/// Replies remembered per session for nonce replay.
const NONCE_CAPACITY: usize = 128;

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: StatusCode,
    pub body: Value,
}

#[derive(Debug)]
pub struct Session {
    pub canvas: CanvasState,
    /// Top three for the strokes in progress, if any.
    pub prediction: Option<ElementPrediction>,
    /// Ranking of the last search, served by page without re-scoring.
    pub ranking: Option<Ranking>,
    pub created: SystemTime,
    replies: VecDeque<(String, Reply)>,
}

impl Session {
    fn new() -> Self {
        Self {
            canvas: CanvasState::default(),
            prediction: None,
            ranking: None,
            created: SystemTime::now(),
            replies: VecDeque::new(),
        }
    }

    pub fn cached_reply(&self, nonce: &str) -> Option<Reply> {
        self.replies
            .iter()
            .find(|(n, _)| n == nonce)
            .map(|(_, r)| r.clone())
    }

    pub fn remember(&mut self, nonce: String, reply: Reply) {
        if self.replies.len() == NONCE_CAPACITY {
            self.replies.pop_front();
        }
        self.replies.push_back((nonce, reply));
    }
}

struct Entry {
    session: Arc<Mutex<Session>>,
    last_active: Instant,
}

pub struct SessionStore {
    ttl: Duration,
    sessions: Mutex<HashMap<String, Entry>>,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn create(&self) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.sessions.lock().insert(
            id.clone(),
            Entry {
                session: Arc::new(Mutex::new(Session::new())),
                last_active: Instant::now(),
            },
        );
        id
    }

    /// Looks up a live session and marks it active. An expired session is
    /// dropped and reported as unknown.
    pub fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        let mut map = self.sessions.lock();
        let now = Instant::now();
        let entry = map.get_mut(id)?;
        if now.duration_since(entry.last_active) > self.ttl {
            map.remove(id);
            return None;
        }
        entry.last_active = now;
        Some(entry.session.clone())
    }

    /// Drops every expired session; returns how many went.
    pub fn sweep(&self) -> usize {
        let mut map = self.sessions.lock();
        let before = map.len();
        let now = Instant::now();
        map.retain(|_, e| now.duration_since(e.last_active) <= self.ttl);
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_distinct() {
        let store = SessionStore::new(Duration::from_secs(60));
        let a = store.create();
        let b = store.create();
        assert_ne!(a, b);
        assert!(store.get(&a).is_some());
        assert!(store.get("nope").is_none());
    }

    #[test]
    fn idle_sessions_expire() {
        let store = SessionStore::new(Duration::from_millis(20));
        let id = store.create();
        std::thread::sleep(Duration::from_millis(40));
        assert!(store.get(&id).is_none());
        assert!(store.is_empty());
        store.create();
        std::thread::sleep(Duration::from_millis(40));
        assert_eq!(store.sweep(), 1);
    }

    #[test]
    fn nonce_cache_is_bounded() {
        let mut s = Session::new();
        for i in 0..NONCE_CAPACITY + 5 {
            s.remember(
                i.to_string(),
                Reply {
                    status: StatusCode::OK,
                    body: Value::from(i),
                },
            );
        }
        assert!(s.cached_reply("0").is_none());
        assert_eq!(s.cached_reply("130").unwrap().body, Value::from(130));
    }
}
