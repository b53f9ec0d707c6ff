//! Zero-determinant strategies for an alliance of leaders.
//!
//! For a slope `χ` and baseline `l`, set
//!
//! ```text
//! f = χ(g^A − l·𝟙) − (g^-A − l·𝟙)
//! ```
//!
//! If the pivot alliance member plays `p_v = φ·f_v + [alliance cooperated in v]`
//! then `v·f = 0` for every stationary `v`, which is the linear relation
//! `π^-A = χ·π^A + (1 − χ)·l` whatever the outsiders do. Alliance members share
//! the table and one random draw per round, so they always act in unison and
//! `f` only matters on unison states.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{unison_payoffs, Action, GameShape, PayoffVectors, State};
use crate::markov::{
    build_transition_matrix, expected_payoffs, stationary_default, Coupling, FollowerStrategy, LeaderStrategy,
    StationaryVector, TransitionMatrix,
};

/// Relative size under which an entry of `f` counts as exactly zero when
/// deriving the `φ` interval.
const ZERO_ENTRY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZdParams {
    pub shape: GameShape,
    /// Slope `χ ∈ [0, 1)`.
    pub chi: f64,
    /// Enforced baseline payoff.
    pub l: f64,
    /// Scaling `φ`; `None` picks the midpoint of the feasible interval.
    pub phi: Option<f64>,
}

impl ZdParams {
    pub fn new(shape: GameShape, chi: f64, l: f64) -> Self {
        ZdParams { shape, chi, l, phi: None }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = Some(phi);
        self
    }
}

/// A nonempty interval of `φ` values on one side of zero. Zero itself is
/// excluded; the other endpoint is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiInterval {
    pub lower: f64,
    pub upper: f64,
}

impl PhiInterval {
    pub fn len(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, phi: f64) -> bool {
        let slack = 1e-12 * self.len().max(1e-300);
        phi != 0.0 && phi >= self.lower - slack && phi <= self.upper + slack
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub params: ZdParams,
    /// Table shared by every alliance member (owner 0).
    pub strategy: LeaderStrategy,
    /// `f` on every state.
    pub f_vector: Vec<f64>,
    /// Feasible side of the `φ` range that `phi` was drawn from.
    pub phi_interval: PhiInterval,
    /// The other side, when it is nonempty.
    pub opposite_interval: Option<PhiInterval>,
    pub phi: f64,
    /// `|π^-A − χπ^A − (1 − χ)l|` against outsiders randomizing uniformly.
    pub certificate: f64,
}

impl SynthesisResult {
    /// The shared table assigned to each alliance member.
    pub fn alliance_strategies(&self) -> Vec<LeaderStrategy> {
        (0..self.params.shape.alliance())
            .map(|i| self.strategy.with_owner(i).expect("alliance members are leaders"))
            .collect()
    }

    /// Strategy probability in every unison `(action, cooperators)` class.
    pub fn unison_table(&self) -> Vec<(Action, usize, f64)> {
        let shape = &self.params.shape;
        unison_classes(shape)
            .map(|(s, b)| (s, b, self.phi * unison_f(&self.params, s, b) + s.bit() as f64))
            .collect()
    }
}

/// Strategies of every non-alliance player.
#[derive(Debug, Clone)]
pub struct OutsiderProfile {
    pub leaders: Vec<LeaderStrategy>,
    pub followers: Vec<FollowerStrategy>,
}

impl OutsiderProfile {
    pub fn constant(shape: &GameShape, p: f64) -> Result<Self> {
        Ok(OutsiderProfile {
            leaders: (shape.alliance()..shape.leaders())
                .map(|i| LeaderStrategy::constant(i, shape, p))
                .collect::<Result<_>>()?,
            followers: (shape.leaders()..shape.players())
                .map(|j| FollowerStrategy::constant(j, shape, p))
                .collect::<Result<_>>()?,
        })
    }

    pub fn random<R: Rng + ?Sized>(shape: &GameShape, rng: &mut R) -> Result<Self> {
        Ok(OutsiderProfile {
            leaders: (shape.alliance()..shape.leaders())
                .map(|i| LeaderStrategy::random(i, shape, rng))
                .collect::<Result<_>>()?,
            followers: (shape.leaders()..shape.players())
                .map(|j| FollowerStrategy::random(j, shape, rng))
                .collect::<Result<_>>()?,
        })
    }
}

/// Outcome of playing a synthesized alliance against a given outsider profile.
#[derive(Debug, Clone)]
pub struct Enforcement {
    pub pi_alliance: f64,
    pub pi_outsiders: f64,
    pub residual: f64,
    pub stationary: StationaryVector,
}

fn check_chi(chi: f64) -> Result<()> {
    if (0.0..1.0).contains(&chi) {
        Ok(())
    } else {
        Err(Error::Domain(format!("slope chi = {chi} must lie in [0, 1)")))
    }
}

/// Bounds on `l` under which a sign-consistent nonzero `φ` exists.
///
/// With `ϑ = r(N − n_A)(1 − χ) − N` and `D = N(N − n_A)(1 − χ)`:
/// `l_min = max_{0≤b≤N−n_A} ϑb/D + 1` and `l_max = min_{n_A≤b≤N} (ϑb + N²)/D`.
pub fn feasible_l_range(chi: f64, shape: &GameShape) -> Result<(f64, f64)> {
    check_chi(chi)?;
    let n = shape.players() as f64;
    let na = shape.alliance();
    let outsiders = shape.outsiders() as f64;
    let theta = shape.r() * outsiders * (1.0 - chi) - n;
    let denom = n * outsiders * (1.0 - chi);
    let l_min = (0..=shape.outsiders())
        .map(|b| theta * b as f64 / denom + 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let l_max = (na..=shape.players())
        .map(|b| (theta * b as f64 + n * n) / denom)
        .fold(f64::INFINITY, f64::min);
    if l_min > l_max {
        return Err(Error::EmptyRange { l_min, l_max });
    }
    Ok((l_min, l_max))
}

/// Alliance-size condition `(r − 1)N/(2r) < n_A < (r − 1)N/r`.
///
/// The upper inequality is strict: with one outsider it reads `r > N`.
pub fn alliance_admissible(shape: &GameShape) -> bool {
    let r = shape.r();
    let n = shape.players() as f64;
    let na = shape.alliance() as f64;
    (r - 1.0) * n / (2.0 * r) < na && na < (r - 1.0) * n / r
}

fn unison_classes(shape: &GameShape) -> impl Iterator<Item = (Action, usize)> + '_ {
    let coop = (shape.alliance()..=shape.players()).map(|b| (Action::Cooperate, b));
    let defect = (0..=shape.outsiders()).map(|b| (Action::Defect, b));
    coop.chain(defect)
}

fn unison_f(params: &ZdParams, action: Action, cooperators: usize) -> f64 {
    let (ga, gna) = unison_payoffs(&params.shape, action, cooperators).expect("valid unison class");
    params.chi * (ga - params.l) - (gna - params.l)
}

#[derive(Debug, Default)]
struct Side {
    bound: Option<f64>,
    blocked_by: Option<String>,
}

impl Side {
    fn tighten(&mut self, bound: f64, positive: bool) {
        self.bound = Some(match self.bound {
            None => bound,
            Some(b) if positive => b.min(bound),
            Some(b) => b.max(bound),
        });
    }

    fn interval(&self, positive: bool) -> Option<PhiInterval> {
        if self.blocked_by.is_some() {
            return None;
        }
        match (self.bound, positive) {
            (Some(b), true) if b > 0.0 => Some(PhiInterval { lower: 0.0, upper: b }),
            (Some(b), false) if b < 0.0 => Some(PhiInterval { lower: b, upper: 0.0 }),
            _ => None,
        }
    }
}

/// Build the shared alliance strategy for `params`.
///
/// Only unison states constrain `φ`: a cooperating alliance needs
/// `φ·f_v ∈ [−1, 0]` and a defecting one `φ·f_v ∈ [0, 1]`. Keys `(s, x, y)`
/// that no unison state produces get probability 0.
pub fn synthesize(params: &ZdParams, g: &PayoffVectors) -> Result<SynthesisResult> {
    let shape = params.shape;
    check_chi(params.chi)?;
    if !params.l.is_finite() {
        return Err(Error::Domain("baseline l must be finite".into()));
    }
    if !alliance_admissible(&shape) {
        return Err(Error::Inadmissible(format!(
            "n_A = {} is outside ((r-1)N/(2r), (r-1)N/r) for N = {}, r = {}",
            shape.alliance(),
            shape.players(),
            shape.r()
        )));
    }
    if g.alliance.len() != shape.state_count() || g.outsiders.len() != shape.state_count() {
        return Err(Error::Domain("payoff vectors do not match the game shape".into()));
    }
    if params.phi == Some(0.0) {
        return Err(Error::Domain("phi must be nonzero".into()));
    }

    let f_vector: Vec<f64> = g
        .alliance
        .iter()
        .zip(&g.outsiders)
        .map(|(ga, gna)| params.chi * (ga - params.l) - (gna - params.l))
        .collect();

    let magnitude = 1.0 + g.alliance.iter().chain(&g.outsiders).fold(params.l.abs(), |m, x| m.max(x.abs()));
    let eps = ZERO_ENTRY_EPS * magnitude;
    let mut positive = Side::default();
    let mut negative = Side::default();
    let mut any_nonzero = false;
    for (s, b) in unison_classes(&shape) {
        let a = unison_f(params, s, b);
        if a.abs() <= eps {
            continue;
        }
        any_nonzero = true;
        let describe = || format!("alliance {} with {b} cooperators (f = {a:.6})", s.symbol());
        // Permitted range of φ·a: [−1, 0] when cooperating, [0, 1] when defecting.
        let (lo, hi) = match s {
            Action::Cooperate => (-1.0, 0.0),
            Action::Defect => (0.0, 1.0),
        };
        if a > 0.0 {
            if hi == 0.0 {
                positive.blocked_by.get_or_insert_with(describe);
            } else {
                positive.tighten(hi / a, true);
            }
            if lo == 0.0 {
                negative.blocked_by.get_or_insert_with(describe);
            } else {
                negative.tighten(lo / a, false);
            }
        } else {
            if lo == 0.0 {
                positive.blocked_by.get_or_insert_with(describe);
            } else {
                positive.tighten(lo / a, true);
            }
            if hi == 0.0 {
                negative.blocked_by.get_or_insert_with(describe);
            } else {
                negative.tighten(hi / a, false);
            }
        }
    }
    if !any_nonzero {
        return Err(Error::Infeasible(
            "f vanishes on every unison state, so no ZD relation can be enforced".into(),
        ));
    }

    let pos = positive.interval(true);
    let neg = negative.interval(false);
    let (chosen, opposite) = match (pos, neg) {
        (Some(p), Some(n)) if n.len() > p.len() => (n, Some(p)),
        (Some(p), n) => (p, n),
        (None, Some(n)) => (n, None),
        (None, None) => {
            return Err(Error::Infeasible(format!(
                "empty phi interval for chi = {}, l = {}: phi > 0 violates {}; phi < 0 violates {}",
                params.chi,
                params.l,
                positive.blocked_by.as_deref().unwrap_or("no constraint"),
                negative.blocked_by.as_deref().unwrap_or("no constraint"),
            )))
        }
    };

    let (phi_interval, opposite_interval, phi) = match params.phi {
        None => (chosen, opposite, chosen.midpoint()),
        Some(phi) if chosen.contains(phi) => (chosen, opposite, phi),
        Some(phi) if opposite.is_some_and(|o| o.contains(phi)) => (opposite.unwrap(), Some(chosen), phi),
        Some(phi) => {
            return Err(Error::Infeasible(format!(
                "phi = {phi} lies outside the feasible interval [{}, {}]",
                chosen.lower, chosen.upper
            )))
        }
    };

    let strategy = alliance_table(params, phi)?;
    let mut result = SynthesisResult {
        params: ZdParams { phi: Some(phi), ..*params },
        strategy,
        f_vector,
        phi_interval,
        opposite_interval,
        phi,
        certificate: f64::NAN,
    };
    let uniform = OutsiderProfile::constant(&shape, 0.5)?;
    result.certificate = verify_enforcement(&result, &uniform)?.residual;
    Ok(result)
}

fn alliance_table(params: &ZdParams, phi: f64) -> Result<LeaderStrategy> {
    let shape = params.shape;
    let na = shape.alliance();
    let spare_leaders = shape.leaders() - na;
    let mut violation = None;
    let table = LeaderStrategy::from_fn(0, &shape, |s, x, y| {
        // Can (s, x, y) arise with the whole alliance playing s?
        let unison = match s {
            Action::Cooperate => x + 1 >= na,
            Action::Defect => x <= spare_leaders,
        };
        if !unison {
            return 0.0;
        }
        let b = x + y + s.bit();
        let p = phi * unison_f(params, s, b) + s.bit() as f64;
        if !(-1e-9..=1.0 + 1e-9).contains(&p) {
            violation.get_or_insert((s, b, p));
        }
        p.clamp(0.0, 1.0)
    })?;
    if let Some((s, b, p)) = violation {
        return Err(Error::Infeasible(format!(
            "phi = {phi} gives probability {p} when the alliance played {} with {b} cooperators",
            s.symbol()
        )));
    }
    Ok(table)
}

/// Coupled chain of a synthesized alliance against `outsiders`.
pub fn enforcement_chain(result: &SynthesisResult, outsiders: &OutsiderProfile) -> Result<TransitionMatrix> {
    let shape = result.params.shape;
    let mut leaders = result.alliance_strategies();
    leaders.extend(outsiders.leaders.iter().cloned());
    build_transition_matrix(&shape, &leaders, &outsiders.followers, Coupling::SharedDraw)
}

/// Solve the coupled chain and measure `|π^-A − χπ^A − (1 − χ)l|`.
pub fn verify_enforcement(result: &SynthesisResult, outsiders: &OutsiderProfile) -> Result<Enforcement> {
    let m = enforcement_chain(result, outsiders)?;
    let stationary = stationary_default(&m)?;
    let g = crate::game::payoff_vectors(&result.params.shape);
    let (pi_alliance, pi_outsiders) = expected_payoffs(&stationary, &g);
    let ZdParams { chi, l, .. } = result.params;
    let residual = (pi_outsiders - chi * pi_alliance - (1.0 - chi) * l).abs();
    Ok(Enforcement { pi_alliance, pi_outsiders, residual, stationary })
}

/// Reward and punishment an alliance of `alliance` members can promise a
/// single outsider: `(r·n_A/N + 1, r(N − n_A)/N)` with `N = n_A + 1`.
pub fn incentive_menu(alliance: usize, r: f64) -> Result<(f64, f64)> {
    let shape = GameShape::single_outsider(alliance, r)?;
    if !alliance_admissible(&shape) {
        return Err(Error::Inadmissible(format!(
            "r = {r} does not exceed N = {}; the alliance cannot control the outsider",
            shape.players()
        )));
    }
    let n = shape.players() as f64;
    let na = alliance as f64;
    Ok((r * na / n + 1.0, r * (n - na) / n))
}

/// Does cooperating beat defecting for the alliance whatever a single
/// outsider plays, i.e. `r(n_A + a)/N > r·a/N + 1` for `a ∈ {0, 1}`?
pub fn dominance_check(shape: &GameShape) -> bool {
    let r = shape.r();
    let n = shape.players() as f64;
    let na = shape.alliance() as f64;
    [0.0, 1.0].iter().all(|&a| r * (na + a) / n > r * a / n + 1.0)
}

/// The state in which the alliance plays `action` and exactly the first
/// `outsider_cooperators` outsiders cooperate.
pub fn unison_state(shape: &GameShape, action: Action, outsider_cooperators: usize) -> State {
    let alliance_bits = match action {
        Action::Cooperate => (1u32 << shape.alliance()) - 1,
        Action::Defect => 0,
    };
    let outsider_bits = ((1u32 << outsider_cooperators) - 1) << shape.alliance();
    State(alliance_bits | outsider_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::game::payoff_vectors;
    use crate::markov::{determinant_dot, stationary_default, zd_determinant};

    fn fig2() -> GameShape {
        GameShape::new(3, 2, 2, 9.0).unwrap()
    }

    fn synth(shape: GameShape, chi: f64, l: f64, phi: Option<f64>) -> Result<SynthesisResult> {
        let params = ZdParams { shape, chi, l, phi };
        synthesize(&params, &payoff_vectors(&shape))
    }

    fn table_entry(res: &SynthesisResult, action: Action, b: usize) -> f64 {
        res.unison_table().into_iter().find(|&(s, bb, _)| s == action && bb == b).unwrap().2
    }

    #[test]
    fn l_range_for_worked_example() {
        let (lo, hi) = feasible_l_range(0.0, &fig2()).unwrap();
        assert_relative_eq!(lo, 3.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 7.0, epsilon = 1e-12);
    }

    #[test]
    fn single_member_range_shrinks() {
        for r in [2.5, 3.0, 7.0, 11.0] {
            let shape = GameShape::new(2, 1, 1, r).unwrap();
            let (lo, hi) = feasible_l_range(0.0, &shape).unwrap();
            assert_relative_eq!(lo, r / 2.0, epsilon = 1e-12);
            assert_relative_eq!(hi, r / 2.0 + 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn l_range_rejects_bad_chi() {
        assert!(feasible_l_range(1.0, &fig2()).is_err());
        assert!(feasible_l_range(-0.1, &fig2()).is_err());
    }

    #[test]
    fn admissibility_examples() {
        assert!(alliance_admissible(&fig2()));
        assert!(!alliance_admissible(&GameShape::new(2, 1, 1, 2.0).unwrap()));
        assert!(alliance_admissible(&GameShape::new(2, 1, 1, 2.01).unwrap()));
        assert!(GameShape::new(3, 3, 3, 9.0).is_err());
    }

    #[test]
    fn pinning_at_lower_end_with_forced_phi() {
        let res = synth(fig2(), 0.0, 3.0, Some(1.0 / 6.0)).unwrap();
        assert_relative_eq!(table_entry(&res, Action::Cooperate, 3), 0.0, epsilon = 1e-12);
        assert_relative_eq!(table_entry(&res, Action::Cooperate, 2), 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(table_entry(&res, Action::Defect, 1), 0.0, epsilon = 1e-12);
        assert_relative_eq!(table_entry(&res, Action::Defect, 0), 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(res.phi_interval.upper, 1.0 / 6.0, epsilon = 1e-12);
        assert!(res.certificate <= 1e-8);

        let f_at = |label: &str| res.f_vector[State::parse(label).unwrap().index()];
        assert_relative_eq!(f_at("ccc"), -6.0, epsilon = 1e-12);
        assert_relative_eq!(f_at("ccd"), -4.0, epsilon = 1e-12);
        assert_relative_eq!(f_at("ddc"), 0.0, epsilon = 1e-12);
        assert_relative_eq!(f_at("ddd"), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pinning_at_upper_end() {
        let res = synth(fig2(), 0.0, 7.0, None).unwrap();
        let f_at = |label: &str| res.f_vector[State::parse(label).unwrap().index()];
        assert_relative_eq!(f_at("ccc"), -2.0, epsilon = 1e-12);
        assert_relative_eq!(f_at("ccd"), 0.0, epsilon = 1e-12);
        assert_relative_eq!(f_at("ddd"), 6.0, epsilon = 1e-12);
        assert_relative_eq!(f_at("ddc"), 4.0, epsilon = 1e-12);
        assert_relative_eq!(res.phi_interval.lower, 0.0);
        assert_relative_eq!(res.phi_interval.upper, 1.0 / 6.0, epsilon = 1e-12);
        assert!(res.opposite_interval.is_none());
        // f vanishes on (c, b = 2), so cooperation there is certain for every φ.
        assert_relative_eq!(table_entry(&res, Action::Cooperate, 2), 1.0, epsilon = 1e-12);
        for phi in [1e-3, 0.05, 1.0 / 6.0] {
            assert!(synth(fig2(), 0.0, 7.0, Some(phi)).is_ok());
        }
        assert!(synth(fig2(), 0.0, 7.0, Some(0.2)).is_err());
    }

    #[test]
    fn boundary_probes_fail() {
        for l in [2.99, 7.01] {
            let err = synth(fig2(), 0.0, l, None).unwrap_err();
            assert!(matches!(err, Error::Infeasible(_)), "l = {l}: {err}");
        }
    }

    #[test]
    fn zero_phi_is_rejected() {
        assert!(matches!(synth(fig2(), 0.0, 5.0, Some(0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn inadmissible_shape_is_rejected() {
        let shape = GameShape::new(2, 1, 1, 2.0).unwrap();
        assert!(matches!(synth(shape, 0.0, 1.5, None), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn enforcement_against_fixed_followers() {
        let shape = fig2();
        let res = synth(shape, 0.0, 3.0, None).unwrap();
        for q in [vec![0.9, 0.5, 0.1], vec![1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0]] {
            let outsiders = OutsiderProfile {
                leaders: vec![],
                followers: vec![FollowerStrategy::new(2, &shape, q.clone()).unwrap()],
            };
            let e = verify_enforcement(&res, &outsiders).unwrap();
            assert!((e.pi_outsiders - 3.0).abs() <= 1e-8, "q = {q:?}: {}", e.pi_outsiders);
        }
    }

    #[test]
    fn stationary_payoff_with_random_follower() {
        let shape = fig2();
        let res = synth(shape, 0.0, 3.0, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let outsiders = OutsiderProfile::random(&shape, &mut rng).unwrap();
        let m = enforcement_chain(&res, &outsiders).unwrap();
        let v = stationary_default(&m).unwrap();
        let g = payoff_vectors(&shape);
        assert!((v.dot(&g.outsiders) - 3.0).abs() <= 1e-8);
    }

    #[test]
    fn extortion_slope_with_random_outsiders() {
        let shape = fig2();
        let (lo, hi) = feasible_l_range(0.5, &shape).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for l in [lo, 0.5 * (lo + hi), hi] {
            let res = synth(shape, 0.5, l, None).unwrap();
            for _ in 0..10 {
                let outsiders = OutsiderProfile::random(&shape, &mut rng).unwrap();
                assert!(verify_enforcement(&res, &outsiders).unwrap().residual <= 1e-8);
            }
        }
    }

    #[test]
    fn outsider_leader_is_also_pinned() {
        // Three leaders, two in the alliance, the outsider is the third leader.
        let shape = GameShape::new(3, 3, 2, 9.0).unwrap();
        let (lo, hi) = feasible_l_range(0.0, &shape).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for l in [lo, 0.3 * lo + 0.7 * hi, hi] {
            let res = synth(shape, 0.0, l, None).unwrap();
            for _ in 0..10 {
                let outsiders = OutsiderProfile::random(&shape, &mut rng).unwrap();
                let e = verify_enforcement(&res, &outsiders).unwrap();
                assert!(e.residual <= 1e-8, "l = {l}: residual {}", e.residual);
            }
        }
    }

    #[test]
    fn phi_invariance() {
        let shape = fig2();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let outsiders = OutsiderProfile::random(&shape, &mut rng).unwrap();
        let a = synth(shape, 0.3, 4.0, None).unwrap();
        let b = synth(shape, 0.3, 4.0, Some(a.phi_interval.upper)).unwrap();
        let c = synth(shape, 0.3, 4.0, Some(a.phi_interval.upper * 0.1)).unwrap();
        let ea = verify_enforcement(&a, &outsiders).unwrap();
        for other in [&b, &c] {
            let e = verify_enforcement(other, &outsiders).unwrap();
            assert!(e.residual <= 1e-8);
            assert!((e.pi_outsiders - e.pi_alliance * 0.3 - 0.7 * 4.0).abs() <= 1e-8);
            assert!((ea.pi_outsiders - ea.pi_alliance * 0.3 - (e.pi_outsiders - e.pi_alliance * 0.3)).abs() <= 1e-8);
        }
    }

    #[test]
    fn synthesized_pivot_zeroes_the_determinant() {
        let shape = fig2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for l in [3.0, 4.5, 7.0] {
            let res = synth(shape, 0.0, l, None).unwrap();
            let outsiders = OutsiderProfile::random(&shape, &mut rng).unwrap();
            let m = enforcement_chain(&res, &outsiders).unwrap();
            let d = zd_determinant(&m, &res.f_vector, 0).unwrap();
            assert!(d.abs() <= 1e-9, "l = {l}: det {d}");
            let ratio = determinant_dot(&m, &res.f_vector, 0).unwrap();
            assert!(ratio.abs() <= 1e-9);
        }
    }

    #[test]
    fn menu_values() {
        assert_eq!(incentive_menu(2, 9.0).unwrap(), (7.0, 3.0));
        for r in [2.5, 4.0, 9.0] {
            let (up, down) = incentive_menu(1, r).unwrap();
            assert_relative_eq!(up, r / 2.0 + 1.0);
            assert_relative_eq!(down, r / 2.0);
            assert_relative_eq!(up - down, 1.0, epsilon = 1e-12);
        }
        assert!(matches!(incentive_menu(2, 2.0), Err(Error::Inadmissible(_))));
        assert!(matches!(incentive_menu(2, 3.0), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn menu_matches_pinning_range() {
        for na in 1..6 {
            for r in [na as f64 + 1.5, 2.0 * (na + 1) as f64 + 3.0] {
                let (up, down) = incentive_menu(na, r).unwrap();
                let (lo, hi) = feasible_l_range(0.0, &GameShape::single_outsider(na, r).unwrap()).unwrap();
                assert_relative_eq!(up, hi, epsilon = 1e-12);
                assert_relative_eq!(down, lo, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominance_check(&fig2()));
        assert!(!dominance_check(&GameShape::new(2, 1, 1, 1.5).unwrap()));
        assert!(dominance_check(&GameShape::new(2, 1, 1, 3.0).unwrap()));
    }

    #[test]
    fn unison_state_helper() {
        let shape = fig2();
        assert_eq!(unison_state(&shape, Action::Cooperate, 0).label(3), "ccd");
        assert_eq!(unison_state(&shape, Action::Defect, 1).label(3), "ddc");
    }
}
