//! Observables: per-particle state descriptions computed from the global
//! colloid list. They model the limited sensing of real micro-agents, so
//! each one selects or condenses information rather than exposing all of it.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{minimum_image_displacement, Vec3};
use crate::types::{Boundary, Colloid};

/// Named slice of an observable vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Fixed-length sensed state for one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableVector {
    pub values: Vec<f64>,
    pub layout: Arc<Vec<Segment>>,
}

impl ObservableVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values of the named segment, if present.
    pub fn segment(&self, name: &str) -> Option<&[f64]> {
        self.layout
            .iter()
            .find(|s| s.name == name)
            .map(|s| &self.values[s.offset..s.offset + s.len])
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SensingError {
    #[error("sub-observables disagree on particle count: {0} vs {1}")]
    CountMismatch(usize, usize),
    #[error("observable produced a non-finite value")]
    NonFinite,
}

/// A per-species state description. `compute` returns one vector per
/// colloid of the species, in colloid order. Implementations are pure up to
/// their declared history, which `reset` clears.
pub trait Observable: Send {
    fn dimension(&self) -> usize;

    fn layout(&self) -> Arc<Vec<Segment>>;

    fn compute(
        &mut self,
        colloids: &[Colloid],
        species: u32,
    ) -> Result<Vec<ObservableVector>, SensingError>;

    fn reset(&mut self) {}
}

fn single_segment(name: &str, len: usize) -> Arc<Vec<Segment>> {
    Arc::new(vec![Segment {
        name: name.to_string(),
        offset: 0,
        len,
    }])
}

// ---------------------------------------------------------------------------
// PositionDirector
// ---------------------------------------------------------------------------

/// Baseline full-information observable: box-normalized position (each
/// component in [0, 1]) concatenated with the director components.
pub struct PositionDirector {
    box_lengths: Vec3,
    dim: usize,
    layout: Arc<Vec<Segment>>,
}

impl PositionDirector {
    pub fn new(box_lengths: Vec3, dim: usize) -> Self {
        let layout = Arc::new(vec![
            Segment {
                name: "position".to_string(),
                offset: 0,
                len: dim,
            },
            Segment {
                name: "director".to_string(),
                offset: dim,
                len: dim,
            },
        ]);
        Self {
            box_lengths,
            dim,
            layout,
        }
    }
}

impl Observable for PositionDirector {
    fn dimension(&self) -> usize {
        2 * self.dim
    }

    fn layout(&self) -> Arc<Vec<Segment>> {
        Arc::clone(&self.layout)
    }

    fn compute(
        &mut self,
        colloids: &[Colloid],
        species: u32,
    ) -> Result<Vec<ObservableVector>, SensingError> {
        let mut out = Vec::new();
        for c in colloids.iter().filter(|c| c.species == species) {
            let mut values = Vec::with_capacity(self.dimension());
            for axis in 0..self.dim {
                values.push(c.pos.component(axis) / self.box_lengths.component(axis));
            }
            for axis in 0..self.dim {
                values.push(c.director.component(axis));
            }
            out.push(ObservableVector {
                values,
                layout: Arc::clone(&self.layout),
            });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Concentration fields
// ---------------------------------------------------------------------------

/// Shape of a scalar source field.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldShape {
    /// amplitude * exp(-|r - source|^2 / (2 width^2))
    Gaussian { width: f64 },
    /// amplitude / (1 + |r - source|)
    InverseDistance,
}

/// Static concentration field with a single source; positive everywhere and
/// maximal at the source.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConcentrationField {
    pub source: Vec3,
    pub shape: FieldShape,
    pub amplitude: f64,
}

impl ConcentrationField {
    pub fn gaussian(source: Vec3, amplitude: f64, width: f64) -> Self {
        Self {
            source,
            shape: FieldShape::Gaussian { width },
            amplitude,
        }
    }

    pub fn value(&self, pos: Vec3) -> f64 {
        let d = (pos - self.source).norm();
        match self.shape {
            FieldShape::Gaussian { width } => {
                self.amplitude * (-d * d / (2.0 * width * width)).exp()
            }
            FieldShape::InverseDistance => self.amplitude / (1.0 + d),
        }
    }
}

/// Scalar observable c(r_t) - c(r_{t-1}) per particle: what a chemotactic
/// bacterium senses. The first sample for a particle yields 0.
pub struct ConcentrationChange {
    field: ConcentrationField,
    history: HashMap<u32, f64>,
    layout: Arc<Vec<Segment>>,
    /// Multiplier applied to the raw difference; observables document their
    /// own normalization.
    pub scale: f64,
}

impl ConcentrationChange {
    pub fn new(field: ConcentrationField) -> Self {
        Self {
            field,
            history: HashMap::new(),
            layout: single_segment("concentration_change", 1),
            scale: 1.0,
        }
    }

    pub fn with_scale(field: ConcentrationField, scale: f64) -> Self {
        Self {
            scale,
            ..Self::new(field)
        }
    }
}

impl Observable for ConcentrationChange {
    fn dimension(&self) -> usize {
        1
    }

    fn layout(&self) -> Arc<Vec<Segment>> {
        Arc::clone(&self.layout)
    }

    fn compute(
        &mut self,
        colloids: &[Colloid],
        species: u32,
    ) -> Result<Vec<ObservableVector>, SensingError> {
        let mut out = Vec::new();
        for c in colloids.iter().filter(|c| c.species == species) {
            let now = self.field.value(c.pos);
            let delta = match self.history.insert(c.id, now) {
                Some(prev) => (now - prev) * self.scale,
                None => 0.0,
            };
            out.push(ObservableVector {
                values: vec![delta],
                layout: Arc::clone(&self.layout),
            });
        }
        Ok(out)
    }

    fn reset(&mut self) {
        self.history.clear();
    }
}

// ---------------------------------------------------------------------------
// Vision cones
// ---------------------------------------------------------------------------

/// Neighbor counts within a sensing radius, resolved into angular sectors
/// around the focal director and, optionally, by species.
///
/// Sector 0 is centered on the director; sectors are equal slices of the
/// field of view (default the full circle). In 2D the sectors partition the
/// azimuth; in 3D they are bands of polar angle away from the director.
/// Output is row-major [sector][type], raw counts (no normalization).
pub struct VisionCones {
    pub n_cones: usize,
    pub radius: f64,
    pub observed_types: Vec<u32>,
    /// Field of view in radians; 2*pi covers the full circle.
    pub fov: f64,
    dim: usize,
    box_lengths: Vec3,
    boundary: Boundary,
    layout: Arc<Vec<Segment>>,
}

impl VisionCones {
    pub fn new(
        n_cones: usize,
        radius: f64,
        observed_types: Vec<u32>,
        dim: usize,
        box_lengths: Vec3,
        boundary: Boundary,
    ) -> Self {
        assert!(n_cones >= 1, "n_cones must be >= 1");
        assert!(radius > 0.0, "radius must be positive");
        let layout = single_segment("vision_cones", n_cones * observed_types.len());
        Self {
            n_cones,
            radius,
            observed_types,
            fov: std::f64::consts::TAU,
            dim,
            box_lengths,
            boundary,
            layout,
        }
    }
}

/// Sector index for a relative angle, with sector 0 centered at angle 0.
/// An angle exactly on a sector boundary goes to the lower-index sector.
fn sector_index(angle: f64, width: f64, n_cones: usize) -> usize {
    let shifted = angle + 0.5 * width;
    let x = shifted / width;
    let mut idx = x.floor();
    if x == idx && x > 0.0 {
        idx -= 1.0; // boundary tie-break: lower sector
    }
    (idx as i64).rem_euclid(n_cones as i64) as usize
}

/// Counts neighbors of the focal particle per (sector, observed type).
pub fn vision_cones(
    colloids: &[Colloid],
    focal: usize,
    n_cones: usize,
    radius: f64,
    observed_types: &[u32],
    fov: f64,
    dim: usize,
    box_lengths: Vec3,
    boundary: Boundary,
) -> Vec<f64> {
    let me = &colloids[focal];
    let width = fov / n_cones as f64;
    let mut counts = vec![0.0; n_cones * observed_types.len()];
    for (j, other) in colloids.iter().enumerate() {
        if j == focal {
            continue;
        }
        let Some(type_slot) = observed_types.iter().position(|&t| t == other.species) else {
            continue;
        };
        let d = minimum_image_displacement(me.pos, other.pos, box_lengths, boundary);
        let dist = d.norm();
        if dist > radius || dist == 0.0 {
            continue;
        }
        let sector = if dim == 2 {
            // signed azimuth of d relative to the director, in (-pi, pi]
            let along = d.dot(me.director);
            let left = me.director.x * d.y - me.director.y * d.x;
            let angle = left.atan2(along);
            if fov < std::f64::consts::TAU && angle.abs() > fov / 2.0 {
                continue;
            }
            sector_index(angle, width, n_cones)
        } else {
            // bands of polar angle away from the director; band 0 is the
            // cone around it
            let polar = (d.dot(me.director) / dist).clamp(-1.0, 1.0).acos();
            if polar > fov / 2.0 {
                continue;
            }
            let band_width = (fov / 2.0) / n_cones as f64;
            ((polar / band_width).floor() as usize).min(n_cones - 1)
        };
        counts[sector * observed_types.len() + type_slot] += 1.0;
    }
    counts
}

impl Observable for VisionCones {
    fn dimension(&self) -> usize {
        self.n_cones * self.observed_types.len()
    }

    fn layout(&self) -> Arc<Vec<Segment>> {
        Arc::clone(&self.layout)
    }

    fn compute(
        &mut self,
        colloids: &[Colloid],
        species: u32,
    ) -> Result<Vec<ObservableVector>, SensingError> {
        let mut out = Vec::new();
        for (i, c) in colloids.iter().enumerate() {
            if c.species != species {
                continue;
            }
            let values = vision_cones(
                colloids,
                i,
                self.n_cones,
                self.radius,
                &self.observed_types,
                self.fov,
                self.dim,
                self.box_lengths,
                self.boundary,
            );
            out.push(ObservableVector {
                values,
                layout: Arc::clone(&self.layout),
            });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// MultiSensing
// ---------------------------------------------------------------------------

/// Concatenation of several observables in declaration order; the layout
/// records each part as a segment.
pub struct MultiSensing {
    parts: Vec<Box<dyn Observable>>,
    layout: Arc<Vec<Segment>>,
}

impl MultiSensing {
    pub fn new(parts: Vec<Box<dyn Observable>>) -> Self {
        let mut segments = Vec::new();
        let mut offset = 0;
        for part in &parts {
            for seg in part.layout().iter() {
                segments.push(Segment {
                    name: seg.name.clone(),
                    offset: offset + seg.offset,
                    len: seg.len,
                });
            }
            offset += part.dimension();
        }
        Self {
            parts,
            layout: Arc::new(segments),
        }
    }
}

impl Observable for MultiSensing {
    fn dimension(&self) -> usize {
        self.parts.iter().map(|p| p.dimension()).sum()
    }

    fn layout(&self) -> Arc<Vec<Segment>> {
        Arc::clone(&self.layout)
    }

    fn compute(
        &mut self,
        colloids: &[Colloid],
        species: u32,
    ) -> Result<Vec<ObservableVector>, SensingError> {
        let mut combined: Vec<Vec<f64>> = Vec::new();
        for part in self.parts.iter_mut() {
            let sub = part.compute(colloids, species)?;
            if combined.is_empty() {
                combined = sub.into_iter().map(|v| v.values).collect();
            } else {
                if sub.len() != combined.len() {
                    return Err(SensingError::CountMismatch(combined.len(), sub.len()));
                }
                for (acc, v) in combined.iter_mut().zip(sub) {
                    acc.extend(v.values);
                }
            }
        }
        Ok(combined
            .into_iter()
            .map(|values| ObservableVector {
                values,
                layout: Arc::clone(&self.layout),
            })
            .collect())
    }

    fn reset(&mut self) {
        for part in self.parts.iter_mut() {
            part.reset();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(x: f64, y: f64) -> Vec3 {
        Vec3::xy(x, y)
    }

    #[test]
    fn position_director_normalizes_to_unit_box() {
        let mut obs = PositionDirector::new(boxed(10.0, 10.0), 2);
        let colloids = vec![Colloid::new(0, 0, boxed(5.0, 5.0), Vec3::new(1.0, 0.0, 0.0))];
        let out = obs.compute(&colloids, 0).unwrap();
        assert_eq!(out[0].values, vec![0.5, 0.5, 1.0, 0.0]);
        assert_eq!(out[0].segment("position").unwrap(), &[0.5, 0.5]);
    }

    #[test]
    fn position_director_origin_corner() {
        let mut obs = PositionDirector::new(boxed(10.0, 10.0), 2);
        let colloids = vec![Colloid::new(0, 0, boxed(0.0, 0.0), Vec3::new(0.0, 1.0, 0.0))];
        let out = obs.compute(&colloids, 0).unwrap();
        assert_eq!(&out[0].values[..2], &[0.0, 0.0]);
    }

    #[test]
    fn position_denormalizes_exactly() {
        let mut obs = PositionDirector::new(boxed(12.5, 7.25), 2);
        let mut rng = crate::rng::RngStream::new(11, 0);
        for _ in 0..100 {
            let pos = boxed(rng.next_uniform() * 12.5, rng.next_uniform() * 7.25);
            let colloids = vec![Colloid::new(0, 0, pos, Vec3::new(1.0, 0.0, 0.0))];
            let out = obs.compute(&colloids, 0).unwrap();
            let back = boxed(out[0].values[0] * 12.5, out[0].values[1] * 7.25);
            assert!((back - pos).norm() < 1e-12);
        }
    }

    #[test]
    fn concentration_change_first_call_zero_then_delta() {
        let field = ConcentrationField::gaussian(boxed(0.0, 0.0), 1.0, 1.0);
        let mut obs = ConcentrationChange::new(field);
        let mut colloids = vec![Colloid::new(0, 0, boxed(2.0, 0.0), Vec3::new(1.0, 0.0, 0.0))];
        let first = obs.compute(&colloids, 0).unwrap();
        assert_eq!(first[0].values[0], 0.0);

        // move from distance 2 to distance 1: delta = e^{-1/2} - e^{-2}
        colloids[0].pos = boxed(1.0, 0.0);
        let second = obs.compute(&colloids, 0).unwrap();
        let expected = (-0.5_f64).exp() - (-2.0_f64).exp();
        assert!((second[0].values[0] - expected).abs() < 1e-12);
        assert!((expected - 0.4712).abs() < 1e-4);
    }

    #[test]
    fn concentration_change_stationary_is_zero() {
        let field = ConcentrationField::gaussian(boxed(0.0, 0.0), 1.0, 1.0);
        let mut obs = ConcentrationChange::new(field);
        let colloids = vec![Colloid::new(0, 0, boxed(2.0, 0.0), Vec3::new(1.0, 0.0, 0.0))];
        obs.compute(&colloids, 0).unwrap();
        let again = obs.compute(&colloids, 0).unwrap();
        assert_eq!(again[0].values[0], 0.0);
    }

    #[test]
    fn concentration_change_positive_toward_source() {
        let field = ConcentrationField::gaussian(boxed(0.0, 0.0), 1.0, 1.0);
        let mut obs = ConcentrationChange::new(field);
        let mut colloids = vec![Colloid::new(0, 0, boxed(3.0, 0.0), Vec3::new(1.0, 0.0, 0.0))];
        obs.compute(&colloids, 0).unwrap();
        colloids[0].pos = boxed(2.5, 0.0);
        let out = obs.compute(&colloids, 0).unwrap();
        assert!(out[0].values[0] > 0.0);
    }

    #[test]
    fn concentration_history_resets() {
        let field = ConcentrationField::gaussian(boxed(0.0, 0.0), 1.0, 1.0);
        let mut obs = ConcentrationChange::new(field);
        let colloids = vec![Colloid::new(0, 0, boxed(2.0, 0.0), Vec3::new(1.0, 0.0, 0.0))];
        obs.compute(&colloids, 0).unwrap();
        obs.reset();
        let out = obs.compute(&colloids, 0).unwrap();
        assert_eq!(out[0].values[0], 0.0);
    }

    #[test]
    fn inverse_distance_field_is_maximal_at_source() {
        let field = ConcentrationField {
            source: boxed(1.0, 1.0),
            shape: FieldShape::InverseDistance,
            amplitude: 2.0,
        };
        assert_eq!(field.value(boxed(1.0, 1.0)), 2.0);
        assert!(field.value(boxed(3.0, 1.0)) < 2.0);
        assert!(field.value(boxed(3.0, 1.0)) > 0.0);
    }

    fn cones_fixture() -> VisionCones {
        VisionCones::new(
            5,
            2.0,
            vec![0],
            2,
            boxed(100.0, 100.0),
            Boundary::Reflecting,
        )
    }

    #[test]
    fn vision_cones_empty_radius_is_all_zero() {
        let mut obs = cones_fixture();
        let colloids = vec![Colloid::new(0, 0, boxed(50.0, 50.0), Vec3::new(1.0, 0.0, 0.0))];
        let out = obs.compute(&colloids, 0).unwrap();
        assert_eq!(out[0].values, vec![0.0; 5]);
    }

    #[test]
    fn vision_cones_neighbor_straight_ahead_in_sector_zero() {
        let mut obs = cones_fixture();
        let colloids = vec![
            Colloid::new(0, 0, boxed(50.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
            Colloid::new(1, 0, boxed(51.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
        ];
        let out = obs.compute(&colloids, 0).unwrap();
        assert_eq!(out[0].values, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn vision_cones_outside_radius_ignored() {
        let mut obs = cones_fixture();
        let colloids = vec![
            Colloid::new(0, 0, boxed(50.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
            Colloid::new(1, 0, boxed(54.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
        ];
        let out = obs.compute(&colloids, 0).unwrap();
        assert_eq!(out[0].values.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn vision_cones_sector_matches_geometric_oracle() {
        // brute force: compare against direct angle arithmetic for many angles
        let n_cones = 5;
        let width = std::f64::consts::TAU / n_cones as f64;
        let mut obs = VisionCones::new(
            n_cones,
            2.0,
            vec![0],
            2,
            boxed(100.0, 100.0),
            Boundary::Reflecting,
        );
        for k in 0..40 {
            let angle = -std::f64::consts::PI + 0.157 + k as f64 * 0.157;
            let neighbor = boxed(50.0 + angle.cos(), 50.0 + angle.sin());
            let colloids = vec![
                Colloid::new(0, 0, boxed(50.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
                Colloid::new(1, 0, neighbor, Vec3::new(1.0, 0.0, 0.0)),
            ];
            let out = obs.compute(&colloids, 0).unwrap();
            // oracle: fold angle into [0, tau), shift by half a sector
            let folded = (angle + width / 2.0).rem_euclid(std::f64::consts::TAU);
            let expected = (folded / width).floor() as usize % n_cones;
            let got = out[0].values.iter().position(|&v| v == 1.0).unwrap();
            assert_eq!(got, expected, "angle {angle}");
        }
    }

    #[test]
    fn vision_cones_boundary_assigns_lower_sector() {
        // neighbor exactly on the sector 0 / sector 1 boundary (angle = w/2)
        let n_cones = 4;
        let width = std::f64::consts::TAU / n_cones as f64;
        let half = width / 2.0; // pi/4, representable rotation
        let mut obs = VisionCones::new(
            n_cones,
            2.0,
            vec![0],
            2,
            boxed(100.0, 100.0),
            Boundary::Reflecting,
        );
        let colloids = vec![
            Colloid::new(0, 0, boxed(50.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
            Colloid::new(
                1,
                0,
                boxed(50.0 + half.cos(), 50.0 + half.sin()),
                Vec3::new(1.0, 0.0, 0.0),
            ),
        ];
        let out = obs.compute(&colloids, 0).unwrap();
        assert_eq!(out[0].values[0], 1.0, "tie goes to the lower sector");
    }

    #[test]
    fn vision_cones_rotation_equivariant() {
        // rotating all positions and directors together leaves counts fixed
        let mut obs = cones_fixture();
        let base = vec![
            Colloid::new(0, 0, boxed(50.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
            Colloid::new(1, 0, boxed(51.0, 50.4), Vec3::new(1.0, 0.0, 0.0)),
            Colloid::new(2, 0, boxed(49.3, 50.8), Vec3::new(0.0, 1.0, 0.0)),
            Colloid::new(3, 0, boxed(50.0, 48.9), Vec3::new(0.0, 1.0, 0.0)),
        ];
        let reference = obs.compute(&base, 0).unwrap();
        for k in 1..8 {
            let theta = k as f64 * 0.61;
            let rot = |v: Vec3| {
                Vec3::xy(
                    v.x * theta.cos() - v.y * theta.sin(),
                    v.x * theta.sin() + v.y * theta.cos(),
                )
            };
            let center = boxed(50.0, 50.0);
            let rotated: Vec<Colloid> = base
                .iter()
                .map(|c| {
                    let mut r = *c;
                    r.pos = center + rot(c.pos - center);
                    r.director = rot(c.director);
                    r
                })
                .collect();
            let out = obs.compute(&rotated, 0).unwrap();
            for (a, b) in reference.iter().zip(out.iter()) {
                assert_eq!(a.values, b.values, "rotation {theta}");
            }
        }
    }

    #[test]
    fn vision_cones_resolves_types() {
        let mut obs = VisionCones::new(
            3,
            2.0,
            vec![0, 1],
            2,
            boxed(100.0, 100.0),
            Boundary::Reflecting,
        );
        let colloids = vec![
            Colloid::new(0, 0, boxed(50.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
            Colloid::new(1, 1, boxed(51.0, 50.0), Vec3::new(1.0, 0.0, 0.0)),
        ];
        let out = obs.compute(&colloids, 0).unwrap();
        // row-major [sector][type]: sector 0, type slot 1
        assert_eq!(out[0].values, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn multi_sensing_single_part_is_identity() {
        let field = ConcentrationField::gaussian(boxed(0.0, 0.0), 1.0, 1.0);
        let mut single = ConcentrationChange::new(field);
        let mut multi = MultiSensing::new(vec![Box::new(ConcentrationChange::new(field))]);
        let colloids = vec![Colloid::new(0, 0, boxed(2.0, 0.0), Vec3::new(1.0, 0.0, 0.0))];
        assert_eq!(
            single.compute(&colloids, 0).unwrap()[0].values,
            multi.compute(&colloids, 0).unwrap()[0].values
        );
    }

    #[test]
    fn multi_sensing_concatenates_with_offsets() {
        let pd = PositionDirector::new(boxed(10.0, 10.0), 2); // len 4
        let field = ConcentrationField::gaussian(boxed(0.0, 0.0), 1.0, 1.0);
        let cc = ConcentrationChange::new(field); // len 1
        let multi = MultiSensing::new(vec![Box::new(pd), Box::new(cc)]);
        assert_eq!(multi.dimension(), 5);
        let layout = multi.layout();
        assert_eq!(layout[0].name, "position");
        assert_eq!(layout[0].offset, 0);
        assert_eq!(layout[1].name, "director");
        assert_eq!(layout[1].offset, 2);
        assert_eq!(layout[2].name, "concentration_change");
        assert_eq!(layout[2].offset, 4);
    }

    #[test]
    fn multi_sensing_order_swap_permutes_segments() {
        let mk_pd = || Box::new(PositionDirector::new(boxed(10.0, 10.0), 2));
        let field = ConcentrationField::gaussian(boxed(0.0, 0.0), 1.0, 1.0);
        let mk_cc = move || Box::new(ConcentrationChange::new(field));
        let mut ab = MultiSensing::new(vec![mk_pd(), mk_cc()]);
        let mut ba = MultiSensing::new(vec![mk_cc(), mk_pd()]);
        let colloids = vec![Colloid::new(0, 0, boxed(5.0, 2.5), Vec3::new(0.0, 1.0, 0.0))];
        let out_ab = ab.compute(&colloids, 0).unwrap();
        let out_ba = ba.compute(&colloids, 0).unwrap();
        let mut sorted_ab = out_ab[0].values.clone();
        let mut sorted_ba = out_ba[0].values.clone();
        sorted_ab.sort_by(f64::total_cmp);
        sorted_ba.sort_by(f64::total_cmp);
        assert_eq!(sorted_ab, sorted_ba);
        assert_ne!(out_ab[0].values, out_ba[0].values);
    }
}
