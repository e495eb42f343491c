use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{distance_transform, threshold, BinaryMap, Pixel, SoftMap};
use crate::stroke::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldParams {
    pub n_reward: usize,
    pub n_penalty: usize,
    /// Distance within which a stroke collects a reward point.
    pub collect_radius: f64,
    /// Distance within which a stroke triggers a penalty point.
    pub penalty_radius: f64,
    /// Minimum distance from the boundary for a penalty point.
    pub clearance: f64,
    /// Minimum pairwise distance between reward points.
    pub min_sep: f64,
    pub reward_value: f64,
    pub penalty_value: f64,
    /// Soft boundary maps are binarized with `value > boundary_t`.
    pub boundary_t: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            n_reward: 50,
            n_penalty: 50,
            collect_radius: 6.0,
            penalty_radius: 4.0,
            clearance: 15.0,
            min_sep: 8.0,
            reward_value: 1.0,
            penalty_value: 0.5,
            boundary_t: 0.5,
        }
    }
}

impl FieldParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Error::InvalidArgument(format!("{what} must be positive, got {v}"));
        if self.n_reward == 0 {
            return Err(Error::InvalidArgument("n_reward must be at least 1".into()));
        }
        for (what, v) in [
            ("collect_radius", self.collect_radius),
            ("penalty_radius", self.penalty_radius),
            ("reward_value", self.reward_value),
            ("penalty_value", self.penalty_value),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(what, v));
            }
        }
        if !(self.clearance >= 0.0 && self.clearance.is_finite()) {
            return Err(bad("clearance", self.clearance));
        }
        if !(self.min_sep >= 0.0 && self.min_sep.is_finite()) {
            return Err(bad("min_sep", self.min_sep));
        }
        if !(0.0..1.0).contains(&self.boundary_t) {
            return Err(Error::InvalidArgument(format!(
                "boundary_t must be in [0, 1), got {}",
                self.boundary_t
            )));
        }
        Ok(())
    }
}

/// Source map for field generation.
#[derive(Debug, Clone, Copy)]
pub enum Boundary<'a> {
    Binary(&'a BinaryMap),
    Soft(&'a SoftMap),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardPoint {
    pub point: Point,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyPoint {
    pub point: Point,
    pub penalty: f64,
}

/// Hidden scoring field of one image. The full form never leaves the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardField {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub reward_points: Vec<RewardPoint>,
    pub penalty_points: Vec<PenaltyPoint>,
    pub total_reward: f64,
    pub params: FieldParams,
    pub seed: u64,
}

impl RewardField {
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

fn to_point(p: Pixel) -> Point {
    Point::new(f64::from(p.x), f64::from(p.y))
}

/// Samples reward points on the boundary (seeded shuffle, then greedy
/// acceptance under `min_sep`) and penalty points among pixels at least
/// `clearance` away from it.
pub fn generate_field(image_id: &str, boundary: Boundary<'_>, params: &FieldParams, seed: u64) -> Result<RewardField> {
    params.validate()?;
    let owned;
    let map = match boundary {
        Boundary::Binary(m) => m,
        Boundary::Soft(s) => {
            owned = threshold(s, params.boundary_t)?;
            &owned
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut candidates: Vec<Pixel> = map.on_pixels().collect();
    if candidates.len() < params.n_reward {
        return Err(Error::Insufficient {
            what: "boundary pixels",
            needed: params.n_reward,
            found: candidates.len(),
        });
    }
    candidates.shuffle(&mut rng);
    let min_sep_sq = params.min_sep * params.min_sep;
    let mut rewards: Vec<Pixel> = Vec::with_capacity(params.n_reward);
    for p in candidates {
        if rewards.len() == params.n_reward {
            break;
        }
        if rewards.iter().all(|q| p.sq_distance(q) as f64 >= min_sep_sq) {
            rewards.push(p);
        }
    }
    if rewards.len() < params.n_reward {
        return Err(Error::Insufficient {
            what: "separated boundary pixels",
            needed: params.n_reward,
            found: rewards.len(),
        });
    }

    let dt = distance_transform(map);
    let clearance_sq = params.clearance * params.clearance;
    let mut far: Vec<Pixel> = (0..map.height())
        .flat_map(|y| (0..map.width()).map(move |x| Pixel::new(x, y)))
        .filter(|p| dt.sq_distance(p.x, p.y).is_none_or(|d| d as f64 >= clearance_sq))
        .collect();
    if far.len() < params.n_penalty {
        return Err(Error::Insufficient {
            what: "pixels with clearance",
            needed: params.n_penalty,
            found: far.len(),
        });
    }
    far.shuffle(&mut rng);
    far.truncate(params.n_penalty);

    let reward_points: Vec<RewardPoint> = rewards
        .into_iter()
        .map(|p| RewardPoint {
            point: to_point(p),
            value: params.reward_value,
        })
        .collect();
    let total_reward = reward_points.iter().map(|r| r.value).sum();
    Ok(RewardField {
        image_id: image_id.to_owned(),
        width: map.width(),
        height: map.height(),
        reward_points,
        penalty_points: far
            .into_iter()
            .map(|p| PenaltyPoint {
                point: to_point(p),
                penalty: params.penalty_value,
            })
            .collect(),
        total_reward,
        params: *params,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_boundary() -> BinaryMap {
        // 25x25 outline of a square: 96 on-pixels, plus 4 on the diagonal = 100
        let mut m = BinaryMap::new(100, 100);
        for i in 10..35 {
            m.set(i, 10, true);
            m.set(i, 34, true);
            m.set(10, i, true);
            m.set(34, i, true);
        }
        for i in 20..24 {
            m.set(i, i, true);
        }
        m
    }

    #[test]
    fn samples_distinct_boundary_pixels() {
        let m = square_boundary();
        assert_eq!(m.count_on(), 100);
        let params = FieldParams { n_reward: 10, min_sep: 0.0, n_penalty: 5, ..Default::default() };
        let f = generate_field("sq", Boundary::Binary(&m), &params, 1).unwrap();
        assert_eq!(f.reward_points.len(), 10);
        let mut seen = std::collections::BTreeSet::new();
        for r in &f.reward_points {
            assert!(m.get(r.point.x as u32, r.point.y as u32));
            assert!(seen.insert((r.point.x as u32, r.point.y as u32)));
        }
        assert_eq!(f.total_reward, 10.0);
    }

    #[test]
    fn seeded_determinism() {
        let m = square_boundary();
        let a = generate_field("sq", Boundary::Binary(&m), &FieldParams { n_reward: 8, ..Default::default() }, 7).unwrap();
        let b = generate_field("sq", Boundary::Binary(&m), &FieldParams { n_reward: 8, ..Default::default() }, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_field("sq", Boundary::Binary(&m), &FieldParams { n_reward: 8, ..Default::default() }, 8).unwrap();
        assert_ne!(a.reward_points, c.reward_points);
    }

    #[test]
    fn penalty_clearance_against_brute_force() {
        let m = square_boundary();
        let on: Vec<Pixel> = m.on_pixels().collect();
        let params = FieldParams { n_reward: 5, n_penalty: 5, clearance: 20.0, ..Default::default() };
        let f = generate_field("sq", Boundary::Binary(&m), &params, 3).unwrap();
        assert_eq!(f.penalty_points.len(), 5);
        for p in &f.penalty_points {
            let px = Pixel::new(p.point.x as u32, p.point.y as u32);
            let nearest = on.iter().map(|q| q.distance(&px)).fold(f64::INFINITY, f64::min);
            assert!(nearest >= 20.0, "{nearest}");
        }
    }

    #[test]
    fn rewards_respect_min_sep() {
        let m = square_boundary();
        let params = FieldParams { n_reward: 6, min_sep: 8.0, ..Default::default() };
        let f = generate_field("sq", Boundary::Binary(&m), &params, 11).unwrap();
        for (i, a) in f.reward_points.iter().enumerate() {
            for b in &f.reward_points[i + 1..] {
                assert!(a.point.distance(&b.point) >= 8.0);
            }
        }
    }

    #[test]
    fn insufficient_inputs() {
        let m = square_boundary();
        let too_many = FieldParams { n_reward: 101, ..Default::default() };
        assert!(matches!(
            generate_field("sq", Boundary::Binary(&m), &too_many, 0),
            Err(Error::Insufficient { needed: 101, found: 100, .. })
        ));
        let crowded = FieldParams { n_reward: 60, min_sep: 8.0, ..Default::default() };
        assert!(generate_field("sq", Boundary::Binary(&m), &crowded, 0).is_err());
        let no_room = FieldParams { n_reward: 5, clearance: 200.0, ..Default::default() };
        assert!(matches!(
            generate_field("sq", Boundary::Binary(&m), &no_room, 0),
            Err(Error::Insufficient { what: "pixels with clearance", .. })
        ));
    }

    #[test]
    fn soft_boundary_is_thresholded() {
        let m = square_boundary();
        let mut values: Vec<f64> = m.bits().iter().map(|&b| if b { 0.8 } else { 0.3 }).collect();
        values[0] = 0.5; // not above the default cut
        let soft = SoftMap::new(100, 100, values).unwrap();
        let params = FieldParams { n_reward: 100, min_sep: 0.0, n_penalty: 1, ..Default::default() };
        let f = generate_field("sq", Boundary::Soft(&soft), &params, 0).unwrap();
        assert_eq!(f.reward_points.len(), 100);
        assert!(f.reward_points.iter().all(|r| m.get(r.point.x as u32, r.point.y as u32)));
    }
}
