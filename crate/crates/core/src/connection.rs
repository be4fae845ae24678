//! Transport-independent handling of one client connection.
//!
//! The websocket server feeds each text frame to [`Connection::receive`] and
//! sends back whatever it returns. A clean client session therefore yields
//! the same message sequence as [`crate::trace::replay`] of its event log.

use crate::mapping::FittedMap;
use crate::protocol::{ClientMessage, ErrorCode, ServerMessage};
use crate::session::{Session, SessionConfig};
use crate::trace::{session_trace, Trace};

#[derive(Debug, Clone)]
pub struct Connection {
    fit: FittedMap,
    session: Option<Session>,
    finished: Vec<Trace>,
}

impl Default for Connection {
    fn default() -> Self {
        Connection::new(crate::config::default_model())
    }
}

impl Connection {
    /// Sessions started on this connection use `fit` as their mapping model.
    pub fn new(fit: FittedMap) -> Connection {
        Connection {
            fit,
            session: None,
            finished: Vec::new(),
        }
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    /// Handles one text frame. Invalid frames produce a single error message
    /// and change nothing.
    pub fn receive(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(m) => self.handle(m),
            Err(e) => vec![ServerMessage::error(ErrorCode::Schema, e.to_string())],
        }
    }

    pub fn handle(&mut self, message: ClientMessage) -> Vec<ServerMessage> {
        match message {
            ClientMessage::StartSession {
                task,
                technique,
                mapping_mode,
                correction_fraction,
                seed,
            } => {
                if self.session.is_some() {
                    return vec![ServerMessage::error(
                        ErrorCode::State,
                        "a session is already running; send end_session first",
                    )];
                }
                if correction_fraction.is_some()
                    && mapping_mode != Some(crate::protocol::MappingModeName::Hybrid)
                {
                    return vec![ServerMessage::error(
                        ErrorCode::Config,
                        "correction_fraction requires mapping_mode hybrid",
                    )];
                }
                let mut config = SessionConfig::new(task, technique, seed);
                config.fit = self.fit;
                config.mapping_mode = mapping_mode.map(|m| m.resolve(correction_fraction));
                match Session::open(config) {
                    Ok((session, out)) => {
                        self.session = Some(session);
                        out
                    }
                    Err(e) => vec![ServerMessage::error(ErrorCode::Config, e.to_string())],
                }
            }
            ClientMessage::EndSession {} => match self.session.take() {
                Some(s) => {
                    self.finished.push(session_trace(&s));
                    vec![s.summary()]
                }
                None => vec![ServerMessage::error(
                    ErrorCode::State,
                    "no session is running",
                )],
            },
            m => {
                let input = m.input().expect("touch and head messages carry input");
                let Some(session) = self.session.as_mut() else {
                    return vec![ServerMessage::error(
                        ErrorCode::State,
                        "send start_session before input",
                    )];
                };
                match session.handle(input) {
                    Ok(out) => out,
                    Err(e) => vec![ServerMessage::error(ErrorCode::Monotonicity, e.to_string())],
                }
            }
        }
    }

    /// Traces of sessions ended since the last call.
    pub fn drain_finished(&mut self) -> Vec<Trace> {
        std::mem::take(&mut self.finished)
    }

    /// Ends the connection, returning every unsaved trace including a
    /// session still running.
    pub fn close(mut self) -> Vec<Trace> {
        if let Some(s) = self.session.take() {
            self.finished.push(session_trace(&s));
        }
        self.finished
    }
}
