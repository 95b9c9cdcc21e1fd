//! Self-adapting menus without the standard library.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`dom`] and [`selector`] parse a document and query it.
//! 2. [`menu`] abstracts menus into a menu → group → item tree with
//!    stable [`menu::ElementId`]s.
//! 3. [`log`] records clicks and page visits into a revisioned
//!    [`log::EventDatabase`].
//! 4. [`analytics`] aggregates the log into per-item and per-page metrics,
//!    and [`policy`] turns those metrics into normalized scores.
//! 5. [`style`] turns scores into an [`style::AdaptationPlan`] that can be
//!    applied to the document and cancelled again.
//!
//! [`engine`] wires the stages together behind a page-load lifecycle.

#![no_std]

extern crate alloc;

pub mod analytics;
pub mod dom;
pub mod engine;
pub mod log;
pub mod menu;
pub mod policy;
pub mod selector;
pub mod style;

pub use analytics::{Analyzer, MetricsSnapshot};
pub use dom::{DocumentTree, NodeId};
pub use engine::{Clock, Engine, EngineConfig, EngineError, MemoryStore, Store};
pub use log::{EventDatabase, InteractionEvent, LogError};
pub use menu::{ElementId, MenuError, MenuModel, PageId, SelectorSet};
pub use policy::{PolicyConfig, PolicyName, Scores};
pub use style::{AdaptationPlan, AppliedState, Mutation, StyleConfig, StyleError, StyleName, TopN};
