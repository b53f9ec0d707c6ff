//! Markov chain of the sequential repeated game.
//!
//! Leaders move first, conditioning on the previous round: their own action
//! `s`, the number `x` of other leaders that cooperated and the number `y` of
//! followers that cooperated. Followers move second and condition on the
//! number `z` of leaders cooperating in the current round. The one-step
//! transition probability `M[v][w]` is the product of every player's
//! probability of producing its action in `w`.
//!
//! Under [`Coupling::SharedDraw`] alliance members share one uniform draw per
//! round: member `i` cooperates iff `u < p_i`. Members with identical
//! conditional probabilities therefore always act in unison.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{Action, GameShape, PayoffVectors, State, DEFAULT_MAX_PLAYERS};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Chains up to this many states are solved directly.
pub const DENSE_DIRECT_MAX_STATES: usize = 256;

/// Power-iteration steps before the dense linear solve is tried.
pub const DENSE_FALLBACK_AFTER: usize = 1_000;

/// Largest player count accepted by [`zd_determinant`].
pub const DETERMINANT_MAX_PLAYERS: usize = 8;

/// Threshold below which the reference determinant `D(𝟙)` counts as zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

fn check_probability(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Strategy(format!("{what}: probability {p} outside [0, 1]")))
    }
}

/// Memory-one strategy of a leader, `p_{s,x,y}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderStrategy {
    owner: usize,
    leaders: usize,
    followers: usize,
    probs: Vec<f64>,
}

impl LeaderStrategy {
    pub fn from_fn<F>(owner: usize, shape: &GameShape, mut prob: F) -> Result<Self>
    where
        F: FnMut(Action, usize, usize) -> f64,
    {
        if owner >= shape.leaders() {
            return Err(Error::Strategy(format!("player {owner} is not a leader")));
        }
        let leaders = shape.leaders();
        let followers = shape.followers();
        let mut probs = Vec::with_capacity(2 * leaders * (followers + 1));
        for s in [Action::Defect, Action::Cooperate] {
            for x in 0..leaders {
                for y in 0..=followers {
                    let p = prob(s, x, y);
                    check_probability(p, &format!("leader {owner} at ({}, {x}, {y})", s.symbol()))?;
                    probs.push(p);
                }
            }
        }
        Ok(LeaderStrategy { owner, leaders, followers, probs })
    }

    pub fn constant(owner: usize, shape: &GameShape, p: f64) -> Result<Self> {
        Self::from_fn(owner, shape, |_, _, _| p)
    }

    pub fn random<R: Rng + ?Sized>(owner: usize, shape: &GameShape, rng: &mut R) -> Result<Self> {
        Self::from_fn(owner, shape, |_, _, _| rng.gen::<f64>())
    }

    /// The same table played by another leader.
    pub fn with_owner(&self, owner: usize) -> Result<Self> {
        if owner >= self.leaders {
            return Err(Error::Strategy(format!("player {owner} is not a leader")));
        }
        Ok(LeaderStrategy { owner, ..self.clone() })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    fn slot(&self, s: Action, x: usize, y: usize) -> usize {
        (s.bit() * self.leaders + x) * (self.followers + 1) + y
    }

    /// Cooperation probability after playing `s` while `x` other leaders and
    /// `y` followers cooperated.
    pub fn get(&self, s: Action, x: usize, y: usize) -> f64 {
        assert!(x < self.leaders && y <= self.followers, "strategy key out of range");
        self.probs[self.slot(s, x, y)]
    }

    /// Cooperation probability given the previous round's full profile.
    pub fn in_state(&self, state: State, shape: &GameShape) -> f64 {
        let s = state.action(self.owner);
        let x = state.leader_cooperators(shape) - s.bit();
        let y = state.follower_cooperators(shape);
        self.get(s, x, y)
    }

    /// All `(s, x, y, p)` entries, defect block first.
    pub fn entries(&self) -> impl Iterator<Item = (Action, usize, usize, f64)> + '_ {
        [Action::Defect, Action::Cooperate].into_iter().flat_map(move |s| {
            (0..self.leaders).flat_map(move |x| (0..=self.followers).map(move |y| (s, x, y, self.get(s, x, y))))
        })
    }
}

/// Strategy of a follower, `q_z` for `z = 0..=n_L` cooperating leaders in the
/// current round.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerStrategy {
    owner: usize,
    probs: Vec<f64>,
}

impl FollowerStrategy {
    pub fn new(owner: usize, shape: &GameShape, probs: Vec<f64>) -> Result<Self> {
        if owner < shape.leaders() || owner >= shape.players() {
            return Err(Error::Strategy(format!("player {owner} is not a follower")));
        }
        if probs.len() != shape.leaders() + 1 {
            return Err(Error::Strategy(format!(
                "follower {owner} needs {} probabilities, got {}",
                shape.leaders() + 1,
                probs.len()
            )));
        }
        for (z, &p) in probs.iter().enumerate() {
            check_probability(p, &format!("follower {owner} at z = {z}"))?;
        }
        Ok(FollowerStrategy { owner, probs })
    }

    pub fn constant(owner: usize, shape: &GameShape, p: f64) -> Result<Self> {
        Self::new(owner, shape, vec![p; shape.leaders() + 1])
    }

    pub fn random<R: Rng + ?Sized>(owner: usize, shape: &GameShape, rng: &mut R) -> Result<Self> {
        let probs = (0..=shape.leaders()).map(|_| rng.gen::<f64>()).collect();
        Self::new(owner, shape, probs)
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn get(&self, z: usize) -> f64 {
        self.probs[z]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// Every player randomizes on its own.
    #[default]
    Independent,
    /// Alliance members share one uniform draw per round.
    SharedDraw,
}

/// Row-stochastic one-step transition matrix over the `2^N` action profiles.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    entries: DMatrix<f64>,
    shape: GameShape,
}

impl TransitionMatrix {
    pub fn shape(&self) -> &GameShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, from: State, to: State) -> f64 {
        self.entries[(from.index(), to.index())]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|row| (row.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Distribution over bit patterns of a group of players randomizing independently.
fn independent_patterns(probs: &[f64]) -> Vec<(u32, f64)> {
    let mut patterns = vec![(0u32, 1.0)];
    for (k, &p) in probs.iter().enumerate() {
        let mut next = Vec::with_capacity(patterns.len() * 2);
        for &(bits, mass) in &patterns {
            if p > 0.0 {
                next.push((bits | 1 << k, mass * p));
            }
            if p < 1.0 {
                next.push((bits, mass * (1.0 - p)));
            }
        }
        patterns = next;
    }
    patterns
}

/// Distribution over bit patterns when every member cooperates iff a shared
/// uniform `u` falls below its probability.
fn shared_draw_patterns(probs: &[f64]) -> Vec<(u32, f64)> {
    let mut cuts: Vec<f64> = probs.iter().copied().chain([0.0, 1.0]).collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let u = 0.5 * (w[0] + w[1]);
            let bits = probs
                .iter()
                .enumerate()
                .filter(|&(_, &p)| u < p)
                .fold(0u32, |acc, (k, _)| acc | 1 << k);
            (bits, w[1] - w[0])
        })
        .collect()
}

fn order_strategies<'a, T>(
    mut items: Vec<&'a T>,
    owner: impl Fn(&T) -> usize,
    expected: std::ops::Range<usize>,
    role: &str,
) -> Result<Vec<&'a T>> {
    items.sort_by_key(|s| owner(s));
    let owners: Vec<usize> = items.iter().map(|s| owner(s)).collect();
    let want: Vec<usize> = expected.clone().collect();
    if owners != want {
        return Err(Error::Strategy(format!(
            "{role} strategies cover players {owners:?}, expected exactly {want:?}"
        )));
    }
    Ok(items)
}

/// Build `M` with the default player cap.
pub fn build_transition_matrix(
    shape: &GameShape,
    leaders: &[LeaderStrategy],
    followers: &[FollowerStrategy],
    coupling: Coupling,
) -> Result<TransitionMatrix> {
    build_transition_matrix_with_limit(shape, leaders, followers, coupling, DEFAULT_MAX_PLAYERS)
}

pub fn build_transition_matrix_with_limit(
    shape: &GameShape,
    leaders: &[LeaderStrategy],
    followers: &[FollowerStrategy],
    coupling: Coupling,
    max_players: usize,
) -> Result<TransitionMatrix> {
    if shape.players() > max_players {
        return Err(Error::Domain(format!(
            "{} players exceed the dense-chain limit of {max_players}",
            shape.players()
        )));
    }
    let leaders = order_strategies(leaders.iter().collect(), |s| s.owner(), 0..shape.leaders(), "leader")?;
    let followers = order_strategies(
        followers.iter().collect(),
        |s| s.owner(),
        shape.leaders()..shape.players(),
        "follower",
    )?;
    for l in &leaders {
        if l.leaders != shape.leaders() || l.followers != shape.followers() {
            return Err(Error::Strategy(format!(
                "leader {} strategy was built for a different game shape",
                l.owner()
            )));
        }
    }

    let n_states = shape.state_count();
    let n_leaders = shape.leaders();
    let n_alliance = shape.alliance();
    let mut entries = DMatrix::zeros(n_states, n_states);

    // Follower patterns depend only on z, so precompute one table per z.
    let follower_tables: Vec<Vec<(u32, f64)>> = (0..=n_leaders)
        .map(|z| {
            let probs: Vec<f64> = followers.iter().map(|f| f.get(z)).collect();
            independent_patterns(&probs)
        })
        .collect();

    for from in shape.states() {
        let p: Vec<f64> = leaders.iter().map(|l| l.in_state(from, shape)).collect();
        let alliance_patterns = match coupling {
            Coupling::SharedDraw if n_alliance > 1 => shared_draw_patterns(&p[..n_alliance]),
            _ => independent_patterns(&p[..n_alliance]),
        };
        let rest_patterns = independent_patterns(&p[n_alliance..]);
        for &(a_bits, a_mass) in &alliance_patterns {
            for &(r_bits, r_mass) in &rest_patterns {
                let leader_bits = a_bits | r_bits << n_alliance;
                let z = leader_bits.count_ones() as usize;
                for &(f_bits, f_mass) in &follower_tables[z] {
                    let to = leader_bits | f_bits << n_leaders;
                    entries[(from.index(), to as usize)] += a_mass * r_mass * f_mass;
                }
            }
        }
    }
    Ok(TransitionMatrix { entries, shape: *shape })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    PowerIteration { iterations: usize },
    DenseSolve,
}

/// Stationary distribution `v` with `vᵀM = vᵀ`.
#[derive(Debug, Clone)]
pub struct StationaryVector {
    pub probs: Vec<f64>,
    /// `‖vᵀM − vᵀ‖∞`
    pub residual: f64,
    pub method: SolveMethod,
}

impl StationaryVector {
    pub fn dot(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.probs.len(), "vector length mismatch");
        self.probs.iter().zip(f).map(|(a, b)| a * b).sum()
    }

    pub fn get(&self, state: State) -> f64 {
        self.probs[state.index()]
    }
}

fn residual(m: &DMatrix<f64>, v: &DVector<f64>) -> (DVector<f64>, f64) {
    let next = m.tr_mul(v);
    let res = (&next - v).amax();
    (next, res)
}

fn dense_stationary(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = m.nrows();
    let mut a = m.transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let mut v = a.lu().solve(&rhs)?;
    if v.iter().any(|x| !x.is_finite() || *x < -1e-9) {
        return None;
    }
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let total = v.sum();
    (total > 0.0).then(|| v / total)
}

fn checked_dense(mat: &DMatrix<f64>, tol: f64) -> Option<StationaryVector> {
    let dense = dense_stationary(mat)?;
    let (_, res) = residual(mat, &dense);
    (res <= tol).then(|| StationaryVector {
        probs: dense.iter().copied().collect(),
        residual: res,
        method: SolveMethod::DenseSolve,
    })
}

/// Stationary distribution of `m`.
///
/// Chains with at most [`DENSE_DIRECT_MAX_STATES`] states are solved directly
/// (`vᵀ(M − I) = 0` with one equation replaced by normalization). Larger
/// chains, and small ones the direct solve rejects, run power iteration from
/// the uniform vector; a dense solve is attempted once after
/// [`DENSE_FALLBACK_AFTER`] unconverged steps.
pub fn stationary(m: &TransitionMatrix, tol: f64, max_iters: usize) -> Result<StationaryVector> {
    let mat = &m.entries;
    let n = mat.nrows();
    let mut tried_dense = false;
    if n <= DENSE_DIRECT_MAX_STATES {
        tried_dense = true;
        if let Some(v) = checked_dense(mat, tol) {
            return Ok(v);
        }
    }
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    let mut last_residual = f64::INFINITY;
    for iteration in 0..max_iters {
        let (next, res) = residual(mat, &v);
        last_residual = res;
        if res <= tol {
            return Ok(StationaryVector {
                probs: v.iter().copied().collect(),
                residual: res,
                method: SolveMethod::PowerIteration { iterations: iteration },
            });
        }
        if !tried_dense && iteration + 1 >= DENSE_FALLBACK_AFTER.min(max_iters) {
            tried_dense = true;
            if let Some(v) = checked_dense(mat, tol) {
                return Ok(v);
            }
        }
        let total = next.sum();
        v = next / total;
    }
    Err(Error::NoConvergence { iterations: max_iters, residual: last_residual })
}

/// [`stationary`] with the default tolerance and iteration cap.
pub fn stationary_default(m: &TransitionMatrix) -> Result<StationaryVector> {
    stationary(m, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS)
}

/// The state in which `pivot_leader` is the only cooperator.
pub fn pivot_state(shape: &GameShape, pivot_leader: usize) -> Result<State> {
    if pivot_leader >= shape.leaders() {
        return Err(Error::Domain(format!(
            "player {pivot_leader} is not a leader; no pivot column exists"
        )));
    }
    Ok(State(1 << pivot_leader))
}

/// `M − I` after the pivot transformation, with `f` in the all-defect column.
fn transformed_matrix(m: &TransitionMatrix, f: &[f64], pivot_leader: usize) -> Result<DMatrix<f64>> {
    let shape = m.shape();
    if shape.players() > DETERMINANT_MAX_PLAYERS {
        return Err(Error::Domain(format!(
            "determinant route is limited to {DETERMINANT_MAX_PLAYERS} players"
        )));
    }
    let n = m.dim();
    if f.len() != n {
        return Err(Error::Domain(format!("f has {} entries, expected {n}", f.len())));
    }
    let pivot = pivot_state(shape, pivot_leader)?;
    let mut a = &m.entries - DMatrix::identity(n, n);
    // Every column in which the pivot leader cooperates folds into the pivot
    // column; afterwards it holds p − 1 where the pivot played c and p elsewhere.
    let mut folded = a.column(pivot.index()).clone_owned();
    for w in shape.states().filter(|w| w.cooperates(pivot_leader) && *w != pivot) {
        folded += a.column(w.index());
    }
    a.set_column(pivot.index(), &folded);
    // The all-defect column never takes part in the fold.
    a.set_column(0, &DVector::from_column_slice(f));
    Ok(a)
}

/// `det[M'_1, …, p̃, …, f]`: the determinant of `M − I` after folding every
/// column where `pivot_leader` cooperates into its pivot column and replacing
/// the all-defect column by `f`.
///
/// Proportional to `v·f`; see [`determinant_dot`] for the normalized ratio.
pub fn zd_determinant(m: &TransitionMatrix, f: &[f64], pivot_leader: usize) -> Result<f64> {
    let value = transformed_matrix(m, f, pivot_leader)?.determinant();
    let reference = transformed_matrix(m, &vec![1.0; m.dim()], pivot_leader)?.determinant();
    if reference.abs() < DEGENERACY_THRESHOLD {
        return Err(Error::Degenerate(reference));
    }
    Ok(value)
}

/// `D(f) / D(𝟙)`, which equals `v·f` for a chain with a unique stationary distribution.
pub fn determinant_dot(m: &TransitionMatrix, f: &[f64], pivot_leader: usize) -> Result<f64> {
    let value = transformed_matrix(m, f, pivot_leader)?.determinant();
    let reference = transformed_matrix(m, &vec![1.0; m.dim()], pivot_leader)?.determinant();
    if reference.abs() < DEGENERACY_THRESHOLD {
        return Err(Error::Degenerate(reference));
    }
    Ok(value / reference)
}

/// The pivot column `p̃` after the fold: `p − 1` where the pivot leader
/// cooperated in the row state and `p` elsewhere.
pub fn pivot_column(m: &TransitionMatrix, pivot_leader: usize) -> Result<Vec<f64>> {
    let shape = m.shape();
    pivot_state(shape, pivot_leader)?;
    Ok(shape
        .states()
        .map(|v| {
            let p: f64 = shape
                .states()
                .filter(|w| w.cooperates(pivot_leader))
                .map(|w| m.get(v, w))
                .sum();
            p - v.cooperates(pivot_leader) as u8 as f64
        })
        .collect())
}

/// `(π^A, π^-A) = (v·g^A, v·g^-A)`.
pub fn expected_payoffs(v: &StationaryVector, g: &PayoffVectors) -> (f64, f64) {
    (v.dot(&g.alliance), v.dot(&g.outsiders))
}
