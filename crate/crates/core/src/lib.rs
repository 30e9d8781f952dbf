//! Interest-based access control for content-centric networking.
//!
//! Names keep a routable prefix in the clear and obfuscate the remainder
//! under a group key. Interests carry a signed authorization payload that
//! any cache holding the content can check against the verification keys
//! bound to that content. The [`simnet`] module runs consumers, routers
//! and producers on a deterministic discrete-event network.

pub mod analysis;
pub mod auth;
pub mod consumer;
pub mod crypto;
pub mod harness;
pub mod message;
pub mod name;
pub mod producer;
pub mod router;
pub mod simnet;
pub mod wire;
