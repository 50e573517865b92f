//! Closed-form rate and distortion expressions for the single-layer test
//! channel, written out independently of the entropy engine.

#![allow(dead_code)]

fn lg(x: f64) -> f64 {
    x.log2()
}

pub fn two_node_distortions(su: f64, sq: f64, rho: f64, s2: f64) -> (f64, f64) {
    let d1 = sq * su / (sq * su + sq + su);
    let d2 = (rho + 1.0) * sq * s2 * su / ((rho + 1.0) * sq * (s2 * su + s2 + su) + 2.0 * s2 * su);
    (d1, d2)
}

/// Two-node rates in closed form, parameterized by the one-node distortion.
pub fn two_node_rates(su: f64, rho: f64, s2: f64, d1: f64) -> (f64, f64) {
    let a = d1 * (rho - 1.0) * (su + 1.0) + 2.0 * su;
    let b = d1 * ((rho - 1.0) * s2 * (su + 1.0) + (rho + 1.0) * su) + 2.0 * s2 * su;
    let root = (1.0 - rho * rho).sqrt();
    let r = 0.5 * lg(1.0 + 1.0 / su) + 0.5 * lg(su / (root * d1 * (su + 1.0))) + 0.25 * lg(b / (s2 * a));
    let layer = 0.5 * lg((1.0 - rho) * a / (root * su));
    (r, layer.max(0.0) + 0.25 * lg(b / (s2 * a)))
}

/// Three-node distributed-repair rates in closed form, before clamping.
pub fn three_node_rates(su: f64, sq: f64, rho: f64, s2: f64) -> (f64, f64) {
    let c = ((rho - 1.0).powi(2) * (2.0 * rho + 1.0)).cbrt();
    let pair = (rho + 1.0) * sq * (su + 1.0) + 2.0 * su;
    let r = 0.5 * lg(1.0 + 1.0 / su)
        + 0.5 * lg((1.0 + sq - 1.0 / (1.0 + su)) / (c * sq))
        + 0.25 * lg(((rho + 1.0) * sq * (s2 * su + s2 + su) + 2.0 * s2 * su) / (pair * s2));
    let rr = 0.25 * lg((1.0 - rho) * sq * ((2.0 * rho + 1.0) * sq * (su + 1.0) + 3.0 * su) / (pair * c * sq));
    (r, rr)
}
