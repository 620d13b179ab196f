//! Simulated low-cost temperature sensor array (hotplate field, thermistor and
//! digital sensor models) and a small neural network trained to recover the
//! plate setpoint from all 32 readings.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ablation;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod heatmap;
pub mod nn;
pub mod plate;
pub mod seed;
pub mod sensor;
pub mod thermistor;
