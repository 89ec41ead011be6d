//! Radial planar domains, nested exhaustion families and compact bands.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{BlabError, Complex64, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Disc,
    Annulus,
    PuncturedDisc,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Disc => "disc",
            DomainKind::Annulus => "annulus",
            DomainKind::PuncturedDisc => "punctured_disc",
        }
    }
}

impl FromStr for DomainKind {
    type Err = BlabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disc" => Ok(DomainKind::Disc),
            "annulus" => Ok(DomainKind::Annulus),
            "punctured_disc" => Ok(DomainKind::PuncturedDisc),
            other => Err(BlabError::Parse(format!(
                "unknown domain kind `{other}` (known: disc, annulus, punctured_disc)"
            ))),
        }
    }
}

/// A disc `|z| < r_outer`, an annulus `r_inner < |z| < r_outer`, or a
/// punctured disc `0 < |z| < r_outer`, all centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    kind: DomainKind,
    r_inner: f64,
    r_outer: f64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, r_inner: f64, r_outer: f64) -> Result<Self> {
        let d = DomainSpec { kind, r_inner, r_outer };
        if !(r_outer.is_finite() && r_outer > 0.0 && r_inner.is_finite()) {
            return Err(BlabError::InvalidDomain(format!("radii {r_inner}, {r_outer}")));
        }
        match kind {
            DomainKind::Disc | DomainKind::PuncturedDisc if r_inner != 0.0 => Err(
                BlabError::InvalidDomain(format!("{} needs r_inner = 0, got {r_inner}", kind.name())),
            ),
            DomainKind::Annulus if !(r_inner > 0.0 && r_inner < r_outer) => Err(
                BlabError::InvalidDomain(format!("annulus needs 0 < r_inner < r_outer, got {r_inner}:{r_outer}")),
            ),
            _ => Ok(d),
        }
    }

    pub fn disc(radius: f64) -> Result<Self> {
        Self::new(DomainKind::Disc, 0.0, radius)
    }

    pub fn unit_disc() -> Self {
        DomainSpec { kind: DomainKind::Disc, r_inner: 0.0, r_outer: 1.0 }
    }

    pub fn annulus(r_inner: f64, r_outer: f64) -> Result<Self> {
        Self::new(DomainKind::Annulus, r_inner, r_outer)
    }

    pub fn punctured_disc(radius: f64) -> Result<Self> {
        Self::new(DomainKind::PuncturedDisc, 0.0, radius)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    /// Strict membership: both boundary circles are excluded, and so is the
    /// origin for the punctured disc.
    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        match self.kind {
            DomainKind::Disc => r < self.r_outer,
            DomainKind::Annulus | DomainKind::PuncturedDisc => self.r_inner < r && r < self.r_outer,
        }
    }

    pub fn area(&self) -> f64 {
        PI * (self.r_outer * self.r_outer - self.r_inner * self.r_inner)
    }

    /// Whether the origin is in the closure of the domain.
    pub fn reaches_origin(&self) -> bool {
        self.kind != DomainKind::Annulus
    }

    /// Set inclusion `self ⊆ other`, decided from the radii.
    pub fn is_subset_of(&self, other: &DomainSpec) -> bool {
        if self.r_outer > other.r_outer || self.r_inner < other.r_inner {
            return false;
        }
        // a disc contains the origin, which no annulus or punctured disc does
        !(self.kind == DomainKind::Disc && other.kind != DomainKind::Disc)
    }

    /// Distance from `z` to the complement of the domain.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        if !self.contains(z) {
            return 0.0;
        }
        let r = z.norm();
        let outer = self.r_outer - r;
        match self.kind {
            DomainKind::Disc => outer,
            _ => outer.min(r - self.r_inner),
        }
    }

    /// The same domain with the origin filled in (the punctured disc and the
    /// disc share their Bergman space).
    pub fn holomorphic_hull(&self) -> DomainSpec {
        match self.kind {
            DomainKind::PuncturedDisc => DomainSpec { kind: DomainKind::Disc, ..*self },
            _ => *self,
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.kind.name(), self.r_inner, self.r_outer)
    }
}

impl FromStr for DomainSpec {
    type Err = BlabError;

    /// `kind:r_inner:r_outer`, e.g. `annulus:0.25:1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [kind, r_in, r_out] = parts.as_slice() else {
            return Err(BlabError::Parse(format!("expected kind:r_inner:r_outer, got `{s}`")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| BlabError::Parse(format!("malformed radius `{t}` in `{s}`")))
        };
        DomainSpec::new(kind.trim().parse()?, num(r_in)?, num(r_out)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// A finite stretch `Ω_1, …, Ω_n` of a nested family with its limit domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionPlan {
    pub name: String,
    pub direction: Direction,
    pub limit: DomainSpec,
    indices: Vec<usize>,
    domains: Vec<DomainSpec>,
}

impl ExhaustionPlan {
    /// Builds a plan and checks the nesting required by `direction`.
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        limit: DomainSpec,
        indices: Vec<usize>,
        domains: Vec<DomainSpec>,
    ) -> Result<Self> {
        if domains.is_empty() || indices.len() != domains.len() {
            return Err(BlabError::InvalidArgument("exhaustion needs one domain per index".into()));
        }
        let plan = ExhaustionPlan { name: name.into(), direction, limit, indices, domains };
        for w in plan.domains.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let nested = match direction {
                Direction::Increasing => a.is_subset_of(b) && b.is_subset_of(&limit),
                Direction::Decreasing => b.is_subset_of(a) && limit.is_subset_of(b),
            };
            if !nested {
                return Err(BlabError::NotNested { inner: a.to_string(), outer: b.to_string() });
            }
        }
        Ok(plan)
    }

    /// `Ω_j = Ω` for every index.
    pub fn constant(domain: DomainSpec, length: usize) -> Result<Self> {
        Self::new("constant", Direction::Increasing, domain, (1..=length).collect(), vec![domain; length])
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn domains(&self) -> &[DomainSpec] {
        &self.domains
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &DomainSpec)> {
        self.indices.iter().copied().zip(self.domains.iter())
    }

    /// Domain at index `j`, if the plan has one.
    pub fn domain(&self, j: usize) -> Option<&DomainSpec> {
        self.indices.iter().position(|&i| i == j).map(|p| &self.domains[p])
    }
}

/// The named families with geometric radius schedules `2^{-j}`, `j = 1..=length`.
pub fn standard_exhaustions(name: &str, length: usize) -> Result<ExhaustionPlan> {
    if length < 2 {
        return Err(BlabError::InvalidArgument(format!("exhaustion length must be ≥ 2, got {length}")));
    }
    let indices: Vec<usize> = (1..=length).collect();
    let step = |j: usize| 0.5f64.powi(j as i32);
    let (direction, limit, domains) = match name {
        "annuli_to_punctured_disc" => (
            Direction::Increasing,
            DomainSpec::punctured_disc(1.0)?,
            indices.iter().map(|&j| DomainSpec::annulus(step(j), 1.0)).collect::<Result<Vec<_>>>()?,
        ),
        "discs_increasing" => (
            Direction::Increasing,
            DomainSpec::unit_disc(),
            indices.iter().map(|&j| DomainSpec::disc(1.0 - step(j))).collect::<Result<Vec<_>>>()?,
        ),
        "discs_decreasing" => (
            Direction::Decreasing,
            DomainSpec::unit_disc(),
            indices.iter().map(|&j| DomainSpec::disc(1.0 + step(j))).collect::<Result<Vec<_>>>()?,
        ),
        other => return Err(BlabError::UnknownFamily(other.to_string())),
    };
    ExhaustionPlan::new(name, direction, limit, indices, domains)
}

/// Finite sample of the closed band `r_min ≤ |z| ≤ r_max` inside a parent domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactRegion {
    pub parent: DomainSpec,
    pub r_min: f64,
    pub r_max: f64,
    pub points: Vec<Complex64>,
}

impl CompactRegion {
    /// Points on `ceil(√count)` equally spaced rings, equally spaced in angle
    /// on each ring, listed ring by ring.
    pub fn band(parent: DomainSpec, r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if count == 0 || !(r_min <= r_max) {
            return Err(BlabError::InvalidArgument(format!("band [{r_min}, {r_max}] with {count} points")));
        }
        if !(parent.r_inner() < r_min && r_max < parent.r_outer()) {
            return Err(BlabError::CompactNotInside(parent.to_string()));
        }
        let rings = (count as f64).sqrt().ceil() as usize;
        let per_ring = count.div_ceil(rings);
        let points = (0..count)
            .map(|i| {
                let (ring, k) = (i / per_ring, i % per_ring);
                let r = if rings == 1 { r_min } else { r_min + (r_max - r_min) * ring as f64 / (rings - 1) as f64 };
                Complex64::from_polar(r, 2.0 * PI * k as f64 / per_ring as f64)
            })
            .collect();
        Ok(CompactRegion { parent, r_min, r_max, points })
    }

    /// Whether every sample point sits strictly inside `d`.
    pub fn is_inside(&self, d: &DomainSpec) -> bool {
        self.points.iter().all(|&z| d.contains(z) && d.boundary_distance(z) > 0.0)
    }
}

/// The band `[r_inner + margin, r_outer − margin]` with `count` points.
pub fn default_compact(d: DomainSpec, margin: f64, count: usize) -> Result<CompactRegion> {
    if !(margin > 0.0) || margin >= (d.r_outer() - d.r_inner()) / 2.0 + f64::EPSILON * d.r_outer() {
        return Err(BlabError::MarginTooLarge { margin, domain: d.to_string() });
    }
    let r_min = d.r_inner() + margin;
    let r_max = (d.r_outer() - margin).max(r_min);
    CompactRegion::band(d, r_min, r_max, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn membership_is_strict() {
        assert!(DomainSpec::annulus(0.5, 1.0).unwrap().contains(c(0.7, 0.0)));
        assert!(!DomainSpec::punctured_disc(1.0).unwrap().contains(c(0.0, 0.0)));
        assert!(!DomainSpec::unit_disc().contains(c(1.0, 0.0)));
        assert!(DomainSpec::unit_disc().contains(c(0.0, 0.0)));
        assert!(!DomainSpec::annulus(0.5, 1.0).unwrap().contains(c(0.5, 0.0)));
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(DomainSpec::annulus(0.0, 1.0).is_err());
        assert!(DomainSpec::annulus(1.0, 0.5).is_err());
        assert!(DomainSpec::disc(-1.0).is_err());
        assert!(DomainSpec::new(DomainKind::Disc, 0.2, 1.0).is_err());
    }

    #[test]
    fn text_form_round_trips() {
        let d: DomainSpec = "annulus:0.25:1".parse().unwrap();
        assert_eq!(d, DomainSpec::annulus(0.25, 1.0).unwrap());
        assert_eq!(d.to_string(), "annulus:0.25:1");
        assert!("annulus:0.25".parse::<DomainSpec>().is_err());
        assert!("ring:0:1".parse::<DomainSpec>().is_err());
    }

    #[test]
    fn standard_schedules() {
        let a = standard_exhaustions("annuli_to_punctured_disc", 3).unwrap();
        let inner: Vec<f64> = a.domains().iter().map(|d| d.r_inner()).collect();
        assert_eq!(inner, vec![0.5, 0.25, 0.125]);
        let d = standard_exhaustions("discs_increasing", 2).unwrap();
        let outer: Vec<f64> = d.domains().iter().map(|d| d.r_outer()).collect();
        assert_eq!(outer, vec![0.5, 0.75]);
        let d = standard_exhaustions("discs_decreasing", 2).unwrap();
        let outer: Vec<f64> = d.domains().iter().map(|d| d.r_outer()).collect();
        assert_eq!(outer, vec![1.5, 1.25]);
        assert_eq!(d.direction, Direction::Decreasing);
        assert!(matches!(standard_exhaustions("spirals", 3), Err(BlabError::UnknownFamily(_))));
        assert!(standard_exhaustions("discs_increasing", 1).is_err());
    }

    #[test]
    fn nesting_holds_for_every_family() {
        for name in ["annuli_to_punctured_disc", "discs_increasing", "discs_decreasing"] {
            let plan = standard_exhaustions(name, 12).unwrap();
            for w in plan.domains().windows(2) {
                match plan.direction {
                    Direction::Increasing => {
                        assert!(w[0].is_subset_of(&w[1]));
                        assert!(w[1].is_subset_of(&plan.limit));
                    }
                    Direction::Decreasing => {
                        assert!(w[1].is_subset_of(&w[0]));
                        assert!(plan.limit.is_subset_of(&w[1]));
                    }
                }
            }
        }
    }

    #[test]
    fn non_nested_plan_rejected() {
        let d1 = DomainSpec::disc(0.8).unwrap();
        let d2 = DomainSpec::disc(0.5).unwrap();
        let r = ExhaustionPlan::new("bad", Direction::Increasing, DomainSpec::unit_disc(), vec![1, 2], vec![d1, d2]);
        assert!(matches!(r, Err(BlabError::NotNested { .. })));
    }

    #[test]
    fn default_compact_bands() {
        let k = default_compact(DomainSpec::punctured_disc(1.0).unwrap(), 0.1, 16).unwrap();
        assert_eq!((k.r_min, k.r_max), (0.1, 0.9));
        assert_eq!(k.points.len(), 16);
        let k = default_compact(DomainSpec::annulus(0.5, 1.0).unwrap(), 0.1, 9).unwrap();
        assert!((k.r_min - 0.6).abs() < 1e-15 && (k.r_max - 0.9).abs() < 1e-15);
        let k = default_compact(DomainSpec::unit_disc(), 0.5, 1).unwrap();
        assert_eq!(k.points, vec![c(0.5, 0.0)]);
        assert!(default_compact(DomainSpec::unit_disc(), 0.6, 4).is_err());
        assert!(default_compact(DomainSpec::annulus(0.5, 1.0).unwrap(), 0.3, 4).is_err());
    }

    #[test]
    fn compact_points_lie_in_tail_domains() {
        let plan = standard_exhaustions("annuli_to_punctured_disc", 10).unwrap();
        let k = default_compact(plan.limit, 0.1, 25).unwrap();
        assert!(k.is_inside(&plan.limit));
        let first = plan.domains().iter().position(|d| k.is_inside(d)).unwrap();
        for d in &plan.domains()[first..] {
            assert!(k.points.iter().all(|&z| d.contains(z)));
        }
    }
}
