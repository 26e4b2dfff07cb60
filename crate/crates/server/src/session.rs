use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use emuc_core::interp::{self, InterpError};
use emuc_core::{CheckedDiagram, MachineState};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableView {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    /// Same text as the trace format prints.
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerView {
    pub name: String,
    pub permitted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub trigger: String,
    pub state: String,
}

/// Everything a client needs to render a session. Built fresh for every
/// response; clients never derive values themselves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub session: String,
    pub diagram: String,
    pub nodes: Vec<String>,
    pub curr: String,
    pub prev: String,
    pub variables: Vec<VariableView>,
    pub triggers: Vec<TriggerView>,
    pub idled: bool,
    pub steps: usize,
    pub trace_line: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<HistoryEntry>>,
}

pub struct Session {
    pub id: String,
    pub diagram: Arc<CheckedDiagram>,
    pub state: MachineState,
    pub history: Vec<(String, MachineState)>,
    idled: bool,
}

impl Session {
    pub fn new(id: String, diagram: Arc<CheckedDiagram>) -> Session {
        let state = interp::init(&diagram);
        Session {
            id,
            diagram,
            state,
            history: Vec::new(),
            idled: false,
        }
    }

    pub fn fire(&mut self, trigger: &str) -> Result<(), ApiError> {
        let next = interp::step(&self.diagram, &self.state, trigger).map_err(|e| match e {
            InterpError::UnknownTrigger(t) => ApiError::UnknownTrigger(t),
            trap @ InterpError::Trap { .. } => ApiError::Trap(trap.to_string()),
        })?;
        self.idled = next == self.state;
        self.history.push((trigger.to_string(), next.clone()));
        self.state = next;
        Ok(())
    }

    pub fn reset(&mut self) {
        self.state = interp::init(&self.diagram);
        self.history.clear();
        self.idled = false;
    }

    /// Folds the recorded triggers over the initial state and compares with
    /// the live state, entry by entry.
    pub fn replay_matches(&self) -> bool {
        let mut s = interp::init(&self.diagram);
        for (trigger, recorded) in &self.history {
            match interp::step(&self.diagram, &s, trigger) {
                Ok(next) if &next == recorded => s = next,
                _ => return false,
            }
        }
        s == self.state
    }

    pub fn snapshot(&self, with_history: bool) -> Snapshot {
        let d = &self.diagram;
        Snapshot {
            session: self.id.clone(),
            diagram: d.name.clone(),
            nodes: d.nodes.clone(),
            curr: self.state.curr.clone(),
            prev: self.state.prev.clone(),
            variables: d
                .variables
                .iter()
                .map(|v| VariableView {
                    name: v.name.clone(),
                    ty: v.ty.name().to_string(),
                    value: self.state.valuation[&v.name].to_string(),
                })
                .collect(),
            triggers: d
                .trigger_set()
                .into_iter()
                .map(|t| TriggerView {
                    name: t.to_string(),
                    permitted: interp::permitted(d, &self.state, t)
                        .expect("trigger comes from the diagram"),
                })
                .collect(),
            idled: self.idled,
            steps: self.history.len(),
            trace_line: self.state.trace_line(),
            history: with_history.then(|| {
                self.history
                    .iter()
                    .map(|(t, s)| HistoryEntry {
                        trigger: t.clone(),
                        state: s.trace_line(),
                    })
                    .collect()
            }),
        }
    }
}

struct Slot {
    session: Arc<tokio::sync::Mutex<Session>>,
    last_used: Instant,
}

/// In-memory session table. Each session has its own async lock so that
/// operations on one session apply in arrival order while distinct
/// sessions proceed in parallel.
pub struct SessionStore {
    slots: Mutex<HashMap<String, Slot>>,
    idle_timeout: Duration,
}

impl SessionStore {
    pub fn new(idle_timeout: Duration) -> SessionStore {
        SessionStore {
            slots: Mutex::new(HashMap::new()),
            idle_timeout,
        }
    }

    pub fn idle_timeout(&self) -> Duration {
        self.idle_timeout
    }

    pub fn insert(&self, diagram: Arc<CheckedDiagram>) -> Arc<tokio::sync::Mutex<Session>> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Arc::new(tokio::sync::Mutex::new(Session::new(id.clone(), diagram)));
        self.slots.lock().expect("session table").insert(
            id,
            Slot {
                session: session.clone(),
                last_used: Instant::now(),
            },
        );
        session
    }

    pub fn get(&self, id: &str) -> Result<Arc<tokio::sync::Mutex<Session>>, ApiError> {
        let mut slots = self.slots.lock().expect("session table");
        let slot = slots
            .get_mut(id)
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))?;
        slot.last_used = Instant::now();
        Ok(slot.session.clone())
    }

    pub fn remove(&self, id: &str) -> Result<(), ApiError> {
        self.slots
            .lock()
            .expect("session table")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("session table").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the timeout as of `now`.
    /// Returns how many were evicted.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let mut slots = self.slots.lock().expect("session table");
        let before = slots.len();
        slots.retain(|_, s| now.saturating_duration_since(s.last_used) <= self.idle_timeout);
        before - slots.len()
    }
}
