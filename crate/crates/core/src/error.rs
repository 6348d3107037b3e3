use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("station {station} refers to node {node}, but the instance has {node_count} nodes")]
    StationOutOfRange {
        station: usize,
        node: usize,
        node_count: usize,
    },

    #[error("vertex ({node}, {level}) is outside the node-charge graph")]
    VertexOutOfRange { node: usize, level: usize },

    #[error("server ({server_node}, {server_level}) does not cover demand ({demand_node}, {demand_level})")]
    NotCovering {
        demand_node: usize,
        demand_level: usize,
        server_node: usize,
        server_level: usize,
    },

    #[error("queueing: {0}")]
    Queueing(String),

    #[error("non-myopic model requires positive service rates, got {rate} at ({node}, {level})")]
    NonPositiveServiceRate { node: usize, level: usize, rate: f64 },

    #[error("generator: {0}")]
    Generator(String),

    #[error("MPS line {line}: {message}")]
    Mps { line: usize, message: String },

    #[error("solution file: {0}")]
    SolutionFormat(String),

    #[error("enumeration guard exceeded: {count} placements > {limit}")]
    EnumerationGuard { count: u128, limit: u128 },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("sweep: {0}")]
    Sweep(String),

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
