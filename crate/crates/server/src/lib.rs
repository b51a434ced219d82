//! Live sessions over HTTP and WebSocket. The simulation clock only moves
//! at decision points, so time spent thinking between commands does not
//! count toward completion time.

pub mod api;
pub mod session;

pub use api::{router, AppState};
pub use session::{Frame, Participant, Phase, Session, SessionError};
