//! Learned proxy environments for reinforcement learning.
//!
//! Synthetic environments (state dynamics and rewards) and reward networks
//! (potential-style reward shaping) are represented as small neural
//! networks whose parameters are evolved with natural evolution strategies.
//! Each population member trains a fresh RL agent on its perturbed proxy and
//! is scored by how well (or how quickly) that agent performs on the real
//! task.

pub mod agents;
pub mod cli;
pub mod config;
pub mod envs;
pub mod evalharness;
pub mod nes;
pub mod neural;
pub mod proxies;
pub mod seeding;
