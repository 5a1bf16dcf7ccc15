//! Offline multi-object video segmentation tracking.
//!
//! Per-frame mask proposals (score, RLE mask, appearance embedding) and
//! optical flow go in; long-term, pixel-disjoint object tracks come out.
//! Stages, in order:
//!
//! 1. [`proposal`]: score filter, mask NMS, overlap clipping.
//! 2. [`tracklet`]: flow-warped IoU between consecutive frames, matched
//!    one-to-one ([`assignment`]) into short tracklets.
//! 3. [`fpc`]: tracklets merged into tracks by forest path cutting.
//! 4. [`saliency`]: tracks ranked and the top ones kept.
//!
//! [`pipeline::track`] runs all of them. [`synth`] generates scenarios with
//! ground truth and [`eval`] scores predictions against it.

pub mod assignment;
pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod flow;
pub mod fpc;
pub mod mask;
pub mod output;
pub mod pipeline;
pub mod proposal;
pub mod saliency;
pub mod synth;
pub mod tracklet;

pub use assignment::{Matcher, Matching, ScoreMatrix};
pub use config::Config;
pub use error::{Error, Result};
pub use flow::FlowField;
pub use mask::Mask;
pub use output::{OutputTrack, TrackOutput};
pub use pipeline::{track, TrackingRun};
pub use proposal::{Proposal, Sequence};
pub use tracklet::{FlowDir, FlowSource, Tracklet};
