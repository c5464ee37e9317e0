#![allow(dead_code)]

use std::f64::consts::TAU;

use hardy_core::disc::{Configuration, DiscPoint};
use hardy_core::extremal::PointSet;
use hardy_core::Complex64;
use proptest::prelude::*;

pub fn point(max_r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_r, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

pub fn points(max_r: f64, len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(point(max_r), len)
}

pub fn config(max_r: f64, len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Configuration> {
    points(max_r, len).prop_map(|z| Configuration::from_complex(&z).unwrap())
}

pub fn point_set(max_r: f64, len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PointSet> {
    points(max_r, len).prop_map(|z| PointSet::new(z.into_iter().map(dp).collect(), "prop").unwrap())
}

pub fn dp(z: Complex64) -> DiscPoint {
    DiscPoint::new(z).unwrap()
}

/// Direct product of Möbius factors, skipping `skip`.
pub fn naive_blaschke(nodes: &[Complex64], z: Complex64, skip: Option<usize>) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    nodes
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != skip)
        .fold(one, |acc, (_, &a)| acc * (z - a) / (one - a.conj() * z))
}

pub fn gleason(z: Complex64, w: Complex64) -> f64 {
    ((z - w) / (Complex64::new(1.0, 0.0) - w.conj() * z)).norm()
}
