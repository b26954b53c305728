//! The bundled channel set.

use crate::channel::{Channel, DiscreteJointChannel, GaussianChannel};

/// Joint law of the bundled non-singular 4×4 channel.
pub const RANDOM_4X4: [[f64; 4]; 4] = [
    [0.10, 0.03, 0.05, 0.02],
    [0.04, 0.12, 0.02, 0.06],
    [0.03, 0.05, 0.15, 0.02],
    [0.06, 0.02, 0.04, 0.19],
];

pub fn independent() -> DiscreteJointChannel {
    DiscreteJointChannel::independent(&[0.3, 0.7], &[0.4, 0.6]).expect("valid fixture")
}

pub fn identity() -> DiscreteJointChannel {
    DiscreteJointChannel::identity(2).expect("valid fixture")
}

pub fn bsc_011() -> DiscreteJointChannel {
    DiscreteJointChannel::bsc(0.11).expect("valid fixture")
}

pub fn bsc_025() -> DiscreteJointChannel {
    DiscreteJointChannel::bsc(0.25).expect("valid fixture")
}

pub fn random_4x4() -> DiscreteJointChannel {
    DiscreteJointChannel::new(RANDOM_4X4.iter().map(|r| r.to_vec()).collect()).expect("valid fixture")
}

pub fn gaussian() -> GaussianChannel {
    GaussianChannel::new(1.0, 1.0).expect("valid fixture")
}

/// The discrete fixtures with their file stems.
pub fn discrete() -> Vec<(&'static str, DiscreteJointChannel)> {
    vec![
        ("independent", independent()),
        ("identity", identity()),
        ("bsc_0.11", bsc_011()),
        ("bsc_0.25", bsc_025()),
        ("random_4x4", random_4x4()),
    ]
}

/// Every fixture, the Gaussian channel last.
pub fn all() -> Vec<(&'static str, Channel)> {
    let mut v: Vec<(&'static str, Channel)> = discrete().into_iter().map(|(k, c)| (k, c.into())).collect();
    v.push(("gaussian_1_1", gaussian().into()));
    v
}
