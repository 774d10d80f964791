//! Gridworld simulator and experiment harness for learned delegation
//! between error-prone navigating agents.
//!
//! A team of pre-trained navigating agents (tabular Q-learning or
//! instance-based learning) moves through a Gridworld one cell at a time.
//! At every step an IBL manager picks which agent decides the move, learning
//! only from whole-game outcomes. Some cells are error states in which the
//! tagged agents may abandon their policy and step off every shortest path.

pub mod charts;
pub mod cli;
pub mod delegation;
pub mod experiments;
pub mod gridworld;
pub mod ibl;
pub mod io;
pub mod nav;
pub mod rng;
pub mod simulation;
