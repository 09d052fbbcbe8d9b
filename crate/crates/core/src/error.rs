use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A cosine or normalization was requested on a zero-norm vector.
    #[error("degenerate input: zero-norm vector in {0}")]
    ZeroNorm(&'static str),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("vocabulary of size {0} is too small to draw a corruption")]
    CannotCorrupt(usize),

    #[error("unregistered relation id {0}")]
    UnknownRelation(usize),

    #[error("unknown synset id {0}")]
    UnknownSynset(usize),

    #[error("word id {0} has no synset in the graph")]
    NoSynset(usize),

    /// A table picked up a NaN or infinity during the named training step.
    #[error("non-finite value in table `{table}` after {step} (iteration {iteration})")]
    NonFinite {
        step: &'static str,
        table: &'static str,
        iteration: usize,
    },
}
