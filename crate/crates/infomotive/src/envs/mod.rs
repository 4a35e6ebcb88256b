//! Deterministic episodic environments: cart-pole swing-up and the
//! abstract six-legged crawler with locomotion and self-rescue tasks.

pub mod cartpole;
pub mod crawler;
pub mod episode;

pub use cartpole::{cartpole_erf, wrap_angle, CartPole, CartPoleConfig, CartPoleState};
pub use crawler::{
    locomotion_erf, rescue_erf, trap_barrier, Crawler, CrawlerConfig, CrawlerState,
};
pub use episode::{
    cartpole_trace_ranges, crawler_trace_ranges, run_cartpole_episode, run_crawler_episode,
    CrawlerTask, EpisodeResult, FinalState,
};
