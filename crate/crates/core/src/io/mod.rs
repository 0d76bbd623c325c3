//! Benchmark generators, the model file format, the specification grammar
//! and the result record.

pub mod generators;
pub mod model_file;
pub mod record;
pub mod spec;

pub use generators::{gen_default_grid, gen_grid, gen_maze, gen_maze_from_layout, GridLayout, MAZE_LAYOUT};
pub use model_file::{parse_model, serialize_model};
pub use record::{parse_policy, ResultRecord, RunMode};
pub use spec::{format_spec, parse_spec};
