//! Optimality regions of the receiver, the posterior cover of a menu, and
//! the candidate posteriors used when reallocating probability mass.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::dataset::{revealed_signal, MenuObservation, World};
use crate::error::{Error, Result};
use crate::numeric::{dot, is_distribution, solve_square, sub, Rational};

/// `normal . p >= offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Halfspace {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl Halfspace {
    pub fn contains(&self, p: &[Rational]) -> bool {
        dot(&self.normal, p) >= self.offset
    }
}

/// Vertices of `{p in simplex : h.contains(p) for h in halfspaces}` in dimension `dim`.
///
/// Nonnegativity and `sum p = 1` are always added, so callers only pass the extra cuts.
/// Output is sorted and free of duplicates; an empty polytope gives no vertices.
pub fn vertex_enumerate(dim: usize, halfspaces: &[Halfspace]) -> Vec<Vec<Rational>> {
    let mut cuts: Vec<Halfspace> = Vec::new();
    for h in halfspaces {
        if h.normal.iter().all(Zero::is_zero) {
            if h.offset.is_positive() {
                return Vec::new();
            }
            continue;
        }
        if !cuts.contains(h) {
            cuts.push(h.clone());
        }
    }
    for k in 0..dim {
        cuts.push(Halfspace { normal: crate::numeric::unit(dim, k), offset: Rational::zero() });
    }
    let ones = vec![Rational::one(); dim];
    let mut found = BTreeSet::new();
    for tight in (0..cuts.len()).combinations(dim - 1) {
        let mut a: Vec<Vec<Rational>> = tight.iter().map(|&i| cuts[i].normal.clone()).collect();
        let mut b: Vec<Rational> = tight.iter().map(|&i| cuts[i].offset.clone()).collect();
        a.push(ones.clone());
        b.push(Rational::one());
        let Some(p) = solve_square(a, b) else { continue };
        if cuts.iter().all(|h| h.contains(&p)) {
            found.insert(p);
        }
    }
    found.into_iter().collect()
}

/// Beliefs at which `action` is a receiver best response within `menu`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalityRegion {
    pub action: usize,
    pub halfspaces: Vec<Halfspace>,
    pub vertices: Vec<Vec<Rational>>,
}

impl OptimalityRegion {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Membership for a belief on the simplex.
    pub fn contains(&self, p: &[Rational]) -> bool {
        is_distribution(p) && self.halfspaces.iter().all(|h| h.contains(p))
    }
}

pub fn optimality_region(world: &World, menu: &[usize], action: usize) -> OptimalityRegion {
    let own = &world.receiver_utility[action];
    let halfspaces: Vec<Halfspace> = menu
        .iter()
        .filter(|&&b| b != action)
        .map(|&b| Halfspace { normal: sub(own, &world.receiver_utility[b]), offset: Rational::zero() })
        .collect();
    let vertices = vertex_enumerate(world.n_states(), &halfspaces);
    OptimalityRegion { action, halfspaces, vertices }
}

/// All optimality regions of a menu and the union of their vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosteriorCover {
    pub menu: Vec<usize>,
    pub regions: Vec<OptimalityRegion>,
    pub outer_points: Vec<Vec<Rational>>,
}

impl PosteriorCover {
    pub fn region(&self, action: usize) -> Option<&OptimalityRegion> {
        self.regions.iter().find(|r| r.action == action)
    }
}

pub fn posterior_cover(world: &World, menu: &[usize]) -> PosteriorCover {
    let regions: Vec<OptimalityRegion> =
        menu.iter().map(|&a| optimality_region(world, menu, a)).collect();
    let outer: BTreeSet<Vec<Rational>> =
        regions.iter().flat_map(|r| r.vertices.iter().cloned()).collect();
    PosteriorCover { menu: menu.to_vec(), regions, outer_points: outer.into_iter().collect() }
}

/// Posteriors that may carry reallocated mass for one action of one menu.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub action: usize,
    /// Vertices of the region, then the prior when it qualifies, then accepted extra points.
    pub points: Vec<Vec<Rational>>,
    /// Extra points declared strictly suboptimal by the caller.
    pub excluded: Vec<Vec<Rational>>,
    /// Whether the prior was added to the vertices.
    pub includes_prior: bool,
}

/// Builds the candidate posteriors of `action` in `obs`.
///
/// The prior joins the region's vertices when the action is a receiver best response at the
/// prior and the menu does not reveal the prior itself. `extra` points outside the simplex are
/// an error; points outside the region or already revealed in this menu are dropped.
pub fn candidate_set(
    world: &World,
    obs: &MenuObservation,
    action: usize,
    extra: &[Vec<Rational>],
) -> Result<CandidateSet> {
    if obs.position(action).is_none() {
        return Err(Error::input(format!("action `{}` is not in the menu", world.actions[action])));
    }
    let region = optimality_region(world, &obs.menu, action);
    let signal = revealed_signal(obs);
    let mut points = region.vertices.clone();
    let prior = &obs.prior;
    let mut includes_prior = false;
    if !signal.reveals(prior) && region.contains(prior) {
        includes_prior = true;
        if !points.contains(prior) {
            points.push(prior.clone());
        }
    }
    let mut excluded = Vec::new();
    for p in extra {
        if p.len() != world.n_states() || !is_distribution(p) {
            return Err(Error::input(format!(
                "excluded point {} is not a belief",
                crate::numeric::render_vec(p)
            )));
        }
        if !region.contains(p) || signal.reveals(p) || excluded.contains(p) {
            continue;
        }
        excluded.push(p.clone());
        if !points.contains(p) {
            points.push(p.clone());
        }
    }
    Ok(CandidateSet { action, points, excluded, includes_prior })
}
