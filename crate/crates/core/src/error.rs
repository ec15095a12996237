use thiserror::Error;

use crate::gog::{EdgeId, VertexId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("group of order {order} exceeds the cap of {cap}")]
    ResourceLimit { order: usize, cap: usize },

    #[error("{0}")]
    NotAHomomorphism(String),

    #[error("edge {edge}: {reason}")]
    InvalidEdge { edge: EdgeId, reason: String },

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),

    #[error("graph must be non-empty and connected")]
    Disconnected { components: usize },

    #[error("-chi * {order} = {value} is not an integer: no action of a group of order {order} over this graph")]
    Inadmissible { order: u64, value: String },

    #[error("genus would be negative ({value}) for order {order}")]
    NegativeGenus { order: u64, value: String },

    #[error("no stabilizer menu for vertex {0}")]
    MissingMenu(VertexId),

    #[error("group has no quaternion realization")]
    MissingRealization,

    #[error("surjection is invalid: {0}")]
    InvalidSurjection(String),

    #[error("coset graph has {components} components (image has index {components})")]
    DisconnectedCover { components: usize },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("search: {0}")]
    Search(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
