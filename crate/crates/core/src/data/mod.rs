//! Dataset generation and ingestion.

pub mod dense;
pub mod fresnel;
pub mod idx;
mod stream_source;
pub mod swiss_roll;

pub use fresnel::fresnel;
pub use idx::{load_idx, IdxQuery};
pub use stream_source::{make_stream, StreamSource};
pub use swiss_roll::{gen_swiss_roll, GroundTruth, ParamRanges, SwissRoll};
