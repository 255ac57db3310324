//! The sender's problem for a known utility: optimal signals via concavification over
//! outer points, datasets generated from them, and a grid search used as a test oracle.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;

use num_traits::{Signed, Zero};

use serde::Deserialize;

use crate::dataset::{state_map, MenuObservation, RawQ, RevealedAtom, SdscDataset, World};
use crate::error::{Error, Result};
use crate::geometry::posterior_cover;
use crate::lp::{LinearProgram, LpOutcome};
use crate::numeric::{add_scaled, dot, zeros, Rational};
use crate::persuasion::{build_nbps_system, ColumnRole, NbpsMode};

/// One menu and prior under a known sender utility `u[action][state]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SenderProblem {
    pub world: World,
    pub sender_utility: Vec<Vec<Rational>>,
    pub menu: Vec<usize>,
    pub prior: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalSignal {
    /// One atom per recommended action.
    pub atoms: Vec<RevealedAtom>,
    pub value: Rational,
    /// Supporting hyperplane of the concavified payoff at the prior.
    pub menu_value: Vec<Rational>,
    /// Sender payoff without information.
    pub prior_value: Rational,
}

impl OptimalSignal {
    pub fn is_informative(&self, prior: &[Rational]) -> bool {
        self.atoms.iter().any(|a| a.posterior != prior)
    }
}

impl SenderProblem {
    pub fn check(&self) -> Result<()> {
        let n = self.world.n_states();
        if self.sender_utility.len() != self.world.actions.len()
            || self.sender_utility.iter().any(|r| r.len() != n)
        {
            return Err(Error::input("sender utility must be |actions| x |states|"));
        }
        if self.menu.is_empty() || self.menu.iter().any(|&a| a >= self.world.actions.len()) {
            return Err(Error::input("menu must list known actions"));
        }
        if !crate::dataset::is_full_support_distribution(&self.prior) || self.prior.len() != n {
            return Err(Error::input("prior must be a full-support distribution"));
        }
        Ok(())
    }

    /// Receiver best response at `p`, ties broken toward the sender, then by menu order.
    pub fn recommended(&self, p: &[Rational]) -> usize {
        let best = self.world.receiver_best(&self.menu, p);
        let mut pick = best[0];
        for &a in &best[1..] {
            if dot(&self.sender_utility[a], p) > dot(&self.sender_utility[pick], p) {
                pick = a;
            }
        }
        pick
    }

    /// Sender payoff at belief `p` when the receiver best responds.
    pub fn payoff(&self, p: &[Rational]) -> Rational {
        dot(&self.sender_utility[self.recommended(p)], p)
    }
}

/// Optimal signal by linear programming over outer points; the hyperplane comes from the duals.
///
/// When persuasion brings no strict gain the uninformative signal is returned.
pub fn solve(problem: &SenderProblem) -> Result<OptimalSignal> {
    problem.check()?;
    let n = problem.world.n_states();
    let points = posterior_cover(&problem.world, &problem.menu).outer_points;
    let values: Vec<Rational> = points.iter().map(|p| problem.payoff(p)).collect();
    let a = (0..n).map(|w| points.iter().map(|p| p[w].clone()).collect()).collect();
    let lp = LinearProgram::new(a, problem.prior.clone(), values);
    let sol = match lp.solve() {
        LpOutcome::Optimal(s) => s,
        other => return Err(Error::Internal(format!("sender program ended as {other:?}"))),
    };
    let prior_value = problem.payoff(&problem.prior);
    let menu_value = sol.duals.clone();
    if sol.value <= prior_value {
        let atom = RevealedAtom {
            action: problem.recommended(&problem.prior),
            posterior: problem.prior.clone(),
            mass: Rational::from_integer(1.into()),
        };
        return Ok(OptimalSignal { atoms: vec![atom], value: prior_value.clone(), menu_value, prior_value });
    }
    // merge per recommended action
    let mut merged: BTreeMap<usize, (Rational, Vec<Rational>)> = BTreeMap::new();
    for (p, w) in points.iter().zip(&sol.x) {
        if w.is_zero() {
            continue;
        }
        let entry = merged.entry(problem.recommended(p)).or_insert_with(|| (Rational::zero(), zeros(n)));
        entry.0 += w;
        add_scaled(&mut entry.1, p, w);
    }
    let atoms = problem
        .menu
        .iter()
        .filter_map(|a| merged.get(a).map(|(m, s)| (*a, m, s)))
        .map(|(action, mass, s)| RevealedAtom {
            action,
            posterior: s.iter().map(|v| v / mass).collect(),
            mass: mass.clone(),
        })
        .collect();
    Ok(OptimalSignal { atoms, value: sol.value, menu_value, prior_value })
}

/// Strict gain from persuasion over the receiver acting on the prior.
pub fn benefits_from_persuasion(problem: &SenderProblem) -> Result<bool> {
    let s = solve(problem)?;
    Ok(s.value > s.prior_value)
}

/// Choice data that an optimising sender would produce on each menu and prior.
pub fn generate_dataset(
    world: &World,
    sender_utility: &[Vec<Rational>],
    problems: &[(Vec<usize>, Vec<Rational>)],
) -> Result<SdscDataset> {
    let mut observations = Vec::new();
    for (menu, prior) in problems {
        let problem = SenderProblem {
            world: world.clone(),
            sender_utility: sender_utility.to_vec(),
            menu: menu.clone(),
            prior: prior.clone(),
        };
        let signal = solve(&problem)?;
        observations.push(observation_from_signal(menu, prior, &signal.atoms));
    }
    Ok(SdscDataset { world: world.clone(), observations })
}

/// A world, a sender utility and the menus and priors to solve, as read from JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSet {
    pub world: World,
    pub sender_utility: Vec<Vec<Rational>>,
    pub problems: Vec<(Vec<usize>, Vec<Rational>)>,
}

impl ProblemSet {
    pub fn problem(&self, k: usize) -> SenderProblem {
        let (menu, prior) = &self.problems[k];
        SenderProblem {
            world: self.world.clone(),
            sender_utility: self.sender_utility.clone(),
            menu: menu.clone(),
            prior: prior.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblems {
    states: Vec<String>,
    actions: Vec<String>,
    receiver_utility: BTreeMap<String, BTreeMap<String, RawQ>>,
    sender_utility: BTreeMap<String, BTreeMap<String, RawQ>>,
    problems: Vec<RawProblem>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    menu: Vec<String>,
    prior: BTreeMap<String, RawQ>,
}

fn utility_table(
    states: &[String],
    actions: &[String],
    raw: &BTreeMap<String, BTreeMap<String, RawQ>>,
    what: &str,
) -> Result<Vec<Vec<Rational>>> {
    if let Some(extra) = raw.keys().find(|k| !actions.contains(k)) {
        return Err(Error::input(format!("{what}: unknown action `{extra}`")));
    }
    actions
        .iter()
        .map(|a| {
            let row = raw.get(a).ok_or_else(|| Error::input(format!("{what}: missing action `{a}`")))?;
            state_map(states, row, &format!("{what}[{a}]"))
        })
        .collect()
}

/// Reads `{"states", "actions", "receiver_utility", "sender_utility", "problems": [{"menu", "prior"}]}`.
pub fn problems_from_json(text: &str) -> Result<ProblemSet> {
    let raw: RawProblems = serde_json::from_str(text)?;
    let receiver = utility_table(&raw.states, &raw.actions, &raw.receiver_utility, "receiver_utility")?;
    let sender_utility = utility_table(&raw.states, &raw.actions, &raw.sender_utility, "sender_utility")?;
    let world = World::new(raw.states, raw.actions, receiver)?;
    let mut problems = Vec::new();
    for (k, p) in raw.problems.iter().enumerate() {
        let menu = p
            .menu
            .iter()
            .map(|a| world.action_index(a).ok_or_else(|| Error::input(format!("problem {k}: unknown action `{a}`"))))
            .collect::<Result<Vec<_>>>()?;
        let prior = state_map(&world.states, &p.prior, &format!("problem {k} prior"))?;
        problems.push((menu, prior));
    }
    let set = ProblemSet { world, sender_utility, problems };
    for k in 0..set.problems.len() {
        set.problem(k).check()?;
    }
    Ok(set)
}

/// `sigma(a|w) = mass(a) p_a(w) / p0(w)`.
pub fn observation_from_signal(menu: &[usize], prior: &[Rational], atoms: &[RevealedAtom]) -> MenuObservation {
    let sigma = menu
        .iter()
        .map(|a| match atoms.iter().find(|t| t.action == *a) {
            Some(t) => t.posterior.iter().zip(prior).map(|(p, p0)| &t.mass * p / p0).collect(),
            None => zeros(prior.len()),
        })
        .collect();
    MenuObservation { menu: menu.to_vec(), prior: prior.to_vec(), sigma }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForceOutcome {
    /// Integer weights `k / denominator` on the columns of the state-dependent system.
    Violated { weights: Vec<u32> },
    /// No witness on the grid; a finer grid might still find one.
    InconclusiveConsistent,
    /// The search hit its node budget.
    Aborted,
}

/// Exhaustive search for a balanced reallocation with every weight in `{0, 1/d, ..., 1}`.
///
/// Binary-state datasets only. Beliefs enter through their mass and first moment in exact
/// integer arithmetic, so the search shares nothing with the simplex code beyond the
/// column list.
pub fn brute_force_nbps(dataset: &SdscDataset, grid_denominator: u32) -> Result<BruteForceOutcome> {
    brute_force_nbps_with_budget(dataset, grid_denominator, 50_000_000)
}

pub fn brute_force_nbps_with_budget(
    dataset: &SdscDataset,
    grid_denominator: u32,
    budget: u64,
) -> Result<BruteForceOutcome> {
    if dataset.world.n_states() != 2 {
        return Err(Error::input("grid search supports two states only"));
    }
    let built = build_nbps_system(dataset, &NbpsMode::StateDependent)?;
    let cols = &built.columns;
    let lcm = cols.iter().fold(BigInt::from(1), |acc, c| lcm_of(&acc, c.posterior[1].denom()));
    let mut grid_cols = Vec::with_capacity(cols.len());
    for c in cols {
        let scaled = (&c.posterior[1] * Rational::from_integer(lcm.clone())).to_integer();
        let moment = i64::try_from(scaled).map_err(|_| Error::input("posterior denominators too large for the grid"))?;
        grid_cols.push(GridColumn {
            sign: if c.role == ColumnRole::Revealed { 1 } else { -1 },
            moment,
            target: matches!(c.role, ColumnRole::Candidate { at_prior: true, .. }),
        });
    }

    let mut cell_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut cell_columns: Vec<Vec<usize>> = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let next = cell_columns.len();
        let k = *cell_index.entry((c.observation, c.action)).or_insert(next);
        if k == next {
            cell_columns.push(Vec::new());
        }
        cell_columns[k].push(j);
    }
    let d = i64::from(grid_denominator);
    let cells: Vec<Cell> = cell_columns
        .into_iter()
        .map(|members| Cell::new(members, &grid_cols, d))
        .collect();

    // one row per observation, then one per action; each cell sits in exactly two rows
    let n_obs = dataset.observations.len();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n_obs + dataset.world.actions.len()];
    let mut cell_rows = Vec::with_capacity(cells.len());
    for (&(obs, action), &k) in &cell_index {
        rows[obs].push(k);
        rows[n_obs + action].push(k);
        cell_rows.push((k, [obs, n_obs + action]));
    }
    cell_rows.sort();
    let cell_rows: Vec<[usize; 2]> = cell_rows.into_iter().map(|(_, r)| r).collect();

    let mut search = CellSearch {
        cells: &cells,
        cell_rows,
        open: rows.iter().map(|r| r.len()).collect(),
        rows,
        sums: vec![(0, 0); n_obs + dataset.world.actions.len()],
        chosen: vec![None; cells.len()],
        nodes: 0,
        budget,
        aborted: false,
    };
    if !search.dfs(false) {
        return Ok(if search.aborted {
            BruteForceOutcome::Aborted
        } else {
            BruteForceOutcome::InconclusiveConsistent
        });
    }
    let mut weights = vec![0u32; cols.len()];
    for (cell, choice) in cells.iter().zip(&search.chosen) {
        let (net, hit) = choice.expect("all cells assigned");
        for (j, v) in cell.reconstruct(net, hit, &grid_cols) {
            weights[j] = u32::try_from(v).expect("grid weight");
        }
    }
    Ok(BruteForceOutcome::Violated { weights })
}

fn lcm_of(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut x, mut y) = (a.abs(), b.abs());
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    (a * b).abs() / x
}

struct GridColumn {
    sign: i64,
    moment: i64,
    target: bool,
}

type Net = (i64, i64);

/// All net (mass, moment) contributions one (observation, action) cell can make.
///
/// `layers[t]` maps each reachable net after the first `t` columns to whether some way of
/// reaching it puts weight on a prior column.
struct Cell {
    members: Vec<usize>,
    layers: Vec<HashMap<Net, bool>>,
    /// Final layer in a fixed order for deterministic iteration.
    sorted: Vec<(Net, bool)>,
    bounds: (Net, Net),
}

impl Cell {
    fn new(members: Vec<usize>, cols: &[GridColumn], d: i64) -> Self {
        let mut layers = vec![HashMap::from([((0, 0), false)])];
        for &j in &members {
            let col = &cols[j];
            let prev = layers.last().expect("seeded");
            let mut next: HashMap<Net, bool> = HashMap::with_capacity(prev.len() * 4);
            for (&(m, z), &hit) in prev {
                for v in 0..=d {
                    let key = (m + col.sign * v, z + col.sign * v * col.moment);
                    let h = hit || (col.target && v > 0);
                    let slot = next.entry(key).or_insert(h);
                    *slot |= h;
                }
            }
            layers.push(next);
        }
        let mut sorted: Vec<(Net, bool)> = layers.last().expect("seeded").iter().map(|(k, v)| (*k, *v)).collect();
        sorted.sort_by_key(|(k, _)| (k.0.abs() + k.1.abs(), *k));
        let lo = (
            sorted.iter().map(|(k, _)| k.0).min().unwrap_or(0),
            sorted.iter().map(|(k, _)| k.1).min().unwrap_or(0),
        );
        let hi = (
            sorted.iter().map(|(k, _)| k.0).max().unwrap_or(0),
            sorted.iter().map(|(k, _)| k.1).max().unwrap_or(0),
        );
        Cell { members, layers, sorted, bounds: (lo, hi) }
    }

    fn lookup(&self, net: Net) -> Option<bool> {
        self.layers.last().expect("seeded").get(&net).copied()
    }

    /// Column weights producing `net`, with a prior column used when `hit` is requested.
    fn reconstruct(&self, net: Net, hit: bool, cols: &[GridColumn]) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        let (mut key, mut need) = (net, hit);
        for t in (0..self.members.len()).rev() {
            let col = &cols[self.members[t]];
            let prev = &self.layers[t];
            let v = (0..)
                .find(|&v: &i64| {
                    let back = (key.0 - col.sign * v, key.1 - col.sign * v * col.moment);
                    let covered = col.target && v > 0;
                    matches!(prev.get(&back), Some(&h) if !need || covered || h)
                })
                .expect("net reachable by construction");
            let covered = col.target && v > 0;
            key = (key.0 - col.sign * v, key.1 - col.sign * v * col.moment);
            need = need && !covered;
            out.push((self.members[t], v));
        }
        out
    }
}

struct CellSearch<'a> {
    cells: &'a [Cell],
    cell_rows: Vec<[usize; 2]>,
    rows: Vec<Vec<usize>>,
    open: Vec<usize>,
    sums: Vec<Net>,
    chosen: Vec<Option<(Net, bool)>>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl CellSearch<'_> {
    /// Value a cell must take when it is the last open cell of one of its rows.
    fn forced(&self, k: usize) -> std::result::Result<Option<Net>, ()> {
        let mut forced = None;
        for &r in &self.cell_rows[k] {
            if self.open[r] == 1 {
                let need = (-self.sums[r].0, -self.sums[r].1);
                if forced.is_some_and(|f| f != need) {
                    return Err(());
                }
                forced = Some(need);
            }
        }
        Ok(forced)
    }

    /// Interval test on every row using the bounding boxes of its open cells.
    fn rows_reachable(&self) -> bool {
        self.rows.iter().zip(&self.sums).all(|(members, s)| {
            let (mut lo, mut hi) = ((s.0, s.1), (s.0, s.1));
            for &k in members.iter().filter(|&&k| self.chosen[k].is_none()) {
                let (blo, bhi) = self.cells[k].bounds;
                lo = (lo.0 + blo.0, lo.1 + blo.1);
                hi = (hi.0 + bhi.0, hi.1 + bhi.1);
            }
            lo.0 <= 0 && 0 <= hi.0 && lo.1 <= 0 && 0 <= hi.1
        })
    }

    fn assign(&mut self, k: usize, net: Net, hit: bool) {
        for &r in &self.cell_rows[k] {
            self.sums[r].0 += net.0;
            self.sums[r].1 += net.1;
            self.open[r] -= 1;
        }
        self.chosen[k] = Some((net, hit));
    }

    fn unassign(&mut self, k: usize, net: Net) {
        for &r in &self.cell_rows[k] {
            self.sums[r].0 -= net.0;
            self.sums[r].1 -= net.1;
            self.open[r] += 1;
        }
        self.chosen[k] = None;
    }

    fn dfs(&mut self, hit: bool) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return false;
        }
        let unassigned: Vec<usize> = (0..self.cells.len()).filter(|&k| self.chosen[k].is_none()).collect();
        if unassigned.is_empty() {
            return hit;
        }
        if !hit && unassigned.iter().all(|&k| !self.cells[k].sorted.iter().any(|(_, h)| *h)) {
            return false;
        }
        if !self.rows_reachable() {
            return false;
        }
        // forced cells first, otherwise the smallest domain
        let mut pick: Option<(usize, Option<Net>)> = None;
        for &k in &unassigned {
            match self.forced(k) {
                Err(()) => return false,
                Ok(Some(net)) => {
                    pick = Some((k, Some(net)));
                    break;
                }
                Ok(None) => {
                    let better = pick.is_none_or(|(p, _)| self.cells[k].sorted.len() < self.cells[p].sorted.len());
                    if better {
                        pick = Some((k, None));
                    }
                }
            }
        }
        let (k, forced) = pick.expect("some cell open");
        match forced {
            Some(net) => {
                let Some(can_hit) = self.cells[k].lookup(net) else {
                    return false;
                };
                self.assign(k, net, can_hit);
                let found = self.dfs(hit || can_hit);
                if !found {
                    self.unassign(k, net);
                }
                found
            }
            None => {
                let cells = self.cells;
                for &(net, can_hit) in &cells[k].sorted {
                    self.assign(k, net, can_hit);
                    if self.dfs(hit || can_hit) {
                        return true;
                    }
                    self.unassign(k, net);
                    if self.aborted {
                        return false;
                    }
                }
                false
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::numeric::{int, q};

    fn problem(world: World, u: Vec<Vec<Rational>>, menu: Vec<usize>, p: Rational) -> SenderProblem {
        SenderProblem { world, sender_utility: u, menu, prior: examples::binary_belief(p) }
    }

    #[test]
    fn example1_optimum() {
        let p = problem(examples::example1_world(), examples::example1_sender(), vec![0, 1, 2, 3], q(1, 2));
        let s = solve(&p).unwrap();
        assert_eq!(s.value, q(4, 5));
        assert_eq!(s.atoms.len(), 2);
        assert_eq!((s.atoms[0].action, s.atoms[0].posterior[1].clone(), s.atoms[0].mass.clone()), (1, q(1, 5), q(1, 2)));
        assert_eq!((s.atoms[1].action, s.atoms[1].posterior[1].clone()), (2, q(4, 5)));
        assert!(benefits_from_persuasion(&p).unwrap());
        assert_eq!(s.prior_value, q(1, 5));
        assert_eq!(dot(&s.menu_value, &p.prior), s.value);
    }

    #[test]
    fn example5_second_menu_keeps_the_prior() {
        let p = problem(examples::example5_world(), examples::example5_sender(), vec![2, 3, 4], q(3, 10));
        let s = solve(&p).unwrap();
        assert_eq!(s.value, q(3, 10));
        assert_eq!(s.atoms.len(), 1);
        assert_eq!(s.atoms[0].action, 2);
        assert_eq!(s.atoms[0].posterior, p.prior);
    }

    #[test]
    fn indifferent_sender_reveals_nothing() {
        let p = problem(examples::example1_world(), vec![vec![int(0), int(0)]; 4], vec![0, 1, 2, 3], q(1, 2));
        let s = solve(&p).unwrap();
        assert_eq!(s.atoms.len(), 1);
        assert_eq!(s.atoms[0].posterior, p.prior);
        assert!(!benefits_from_persuasion(&p).unwrap());
    }

    #[test]
    fn example6_depends_on_the_prior() {
        let at = |x| problem(examples::example3_world(), examples::example6_sender(), vec![0, 1, 2], x);
        assert!(benefits_from_persuasion(&at(q(1, 2))).unwrap());
        assert!(!benefits_from_persuasion(&at(q(1, 5))).unwrap());
        let d = generate_dataset(&examples::example3_world(), &examples::example6_sender(), &[(vec![0, 1, 2], examples::binary_belief(q(1, 5)))]).unwrap();
        let signal = crate::dataset::revealed_signal(&d.observations[0]);
        assert_eq!(signal.atoms.len(), 1);
        assert_eq!(signal.atoms[0].posterior, examples::binary_belief(q(1, 5)));
    }

    #[test]
    fn generated_data_reproduces_the_signal() {
        let world = examples::example1_world();
        let d = generate_dataset(&world, &examples::example1_sender(), &[(vec![0, 1, 2, 3], examples::binary_belief(q(1, 2)))]).unwrap();
        assert!(crate::dataset::validate(&d).is_empty());
        assert_eq!(d, examples::example1_consistent());
    }

    #[test]
    fn grid_search_on_examples() {
        let v = brute_force_nbps(&examples::example1(), 30).unwrap();
        assert!(matches!(v, BruteForceOutcome::Violated { .. }));
        let c = brute_force_nbps(&examples::example1_consistent(), 30).unwrap();
        assert_eq!(c, BruteForceOutcome::InconclusiveConsistent);
        let v3 = brute_force_nbps(&examples::example3(), 30).unwrap();
        let BruteForceOutcome::Violated { weights } = v3 else { panic!("{v3:?}") };
        let built = build_nbps_system(&examples::example3(), &NbpsMode::StateDependent).unwrap();
        let x: Vec<Rational> = weights.iter().map(|&k| q(k as i64, 30)).collect();
        assert!(built.system.times(&x).iter().all(|v| v.is_zero()));
        assert!(dot(&built.system.objective, &x).is_negative());
        assert!(brute_force_nbps(&examples::example4(), 30).is_err());
    }
}
