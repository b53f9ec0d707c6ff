//! Payoff arithmetic of the networked social-dilemma game.
//!
//! A player with `Ni` neighbors, `j` of which cooperate, earns
//!
//! ```text
//! U(a | j) = r·(j + a)/(Ni + 1) + (1 − a)
//! ```
//!
//! In a game among `N` players everybody is everybody's neighbor, so with `b`
//! cooperators in total every cooperator earns `r·b/N` and every defector
//! `r·b/N + 1`.
//!
//! Players are indexed `0..N`. Leaders occupy `0..n_leaders`, and the alliance
//! is the prefix `0..n_alliance` of the leaders. A [`State`] packs the action
//! profile of one round into a bit set where bit `k` is player `k`'s action.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Player count above which dense chains are refused unless a caller raises the limit.
pub const DEFAULT_MAX_PLAYERS: usize = 10;

/// Hard upper bound on players; states are stored as `u32` bit sets.
pub const ABSOLUTE_MAX_PLAYERS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Cooperate,
    Defect,
}

impl Action {
    pub fn from_bit(cooperates: bool) -> Self {
        if cooperates {
            Action::Cooperate
        } else {
            Action::Defect
        }
    }

    /// 1 for cooperation, 0 for defection.
    pub fn bit(self) -> usize {
        match self {
            Action::Cooperate => 1,
            Action::Defect => 0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Action::Cooperate => 'c',
            Action::Defect => 'd',
        }
    }
}

/// Polynomial payoff scale `r(n) = a·n^k + b`, evaluated at the number of
/// players `n` taking part in one game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffScale {
    pub a: f64,
    pub k: u32,
    pub b: f64,
}

impl PayoffScale {
    pub fn new(a: f64, k: u32, b: f64) -> Result<Self> {
        let scale = PayoffScale { a, k, b };
        scale.validate()?;
        Ok(scale)
    }

    /// `r(n) = 2n + 3`.
    pub fn linear_default() -> Self {
        PayoffScale { a: 2.0, k: 1, b: 3.0 }
    }

    /// `r(n) = 2n² + 3`.
    pub fn quadratic_default() -> Self {
        PayoffScale { a: 2.0, k: 2, b: 3.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::Domain("payoff scale coefficients must be finite".into()));
        }
        if self.a < 0.0 {
            return Err(Error::Domain(format!("payoff scale coefficient a = {} is negative", self.a)));
        }
        if !(self.k == 1 || self.k == 2) {
            return Err(Error::Domain(format!("payoff scale exponent k = {} is not 1 or 2", self.k)));
        }
        Ok(())
    }

    pub fn eval(&self, n: usize) -> f64 {
        self.a * (n as f64).powi(self.k as i32) + self.b
    }

    /// Every game of two or more players is a social dilemma under this scale.
    ///
    /// With `a ≥ 0` the scale is nondecreasing in `n`, so it suffices to check `n = 2`.
    pub fn is_dilemma_everywhere(&self) -> bool {
        is_social_dilemma(self.eval(2))
    }
}

impl fmt::Display for PayoffScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            1 => write!(f, "r(n) = {}n + {}", self.a, self.b),
            k => write!(f, "r(n) = {}n^{} + {}", self.a, k, self.b),
        }
    }
}

/// Static parameters of one sequential game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameShape {
    players: usize,
    leaders: usize,
    alliance: usize,
    r: f64,
}

impl GameShape {
    pub fn new(players: usize, leaders: usize, alliance: usize, r: f64) -> Result<Self> {
        if players < 2 {
            return Err(Error::InvalidShape(format!("need at least 2 players, got {players}")));
        }
        if players > ABSOLUTE_MAX_PLAYERS {
            return Err(Error::InvalidShape(format!(
                "{players} players exceed the supported maximum of {ABSOLUTE_MAX_PLAYERS}"
            )));
        }
        if leaders < 1 || leaders > players {
            return Err(Error::InvalidShape(format!(
                "leader count {leaders} must lie in 1..={players}"
            )));
        }
        if alliance < 1 || alliance > leaders {
            return Err(Error::InvalidShape(format!(
                "alliance size {alliance} must lie in 1..={leaders} (alliance members are leaders)"
            )));
        }
        if alliance >= players {
            return Err(Error::InvalidShape(
                "the alliance must leave at least one outsider".into(),
            ));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidShape(format!("payoff scale r = {r} must be positive")));
        }
        Ok(GameShape { players, leaders, alliance, r })
    }

    /// Shape of a ZD game on a network: an alliance of `alliance` leaders and
    /// one follower outsider.
    pub fn single_outsider(alliance: usize, r: f64) -> Result<Self> {
        GameShape::new(alliance + 1, alliance, alliance, r)
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn leaders(&self) -> usize {
        self.leaders
    }

    pub fn followers(&self) -> usize {
        self.players - self.leaders
    }

    pub fn alliance(&self) -> usize {
        self.alliance
    }

    pub fn outsiders(&self) -> usize {
        self.players - self.alliance
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn state_count(&self) -> usize {
        1usize << self.players
    }

    pub fn states(&self) -> impl Iterator<Item = State> {
        (0..self.state_count() as u32).map(State)
    }

    pub fn is_leader(&self, player: usize) -> bool {
        player < self.leaders
    }

    pub fn is_alliance_member(&self, player: usize) -> bool {
        player < self.alliance
    }

    fn alliance_mask(&self) -> u32 {
        (1u32 << self.alliance) - 1
    }

    fn leader_mask(&self) -> u32 {
        (1u32 << self.leaders) - 1
    }
}

/// Action profile of one round: bit `k` set means player `k` cooperated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub u32);

impl State {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_actions(actions: &[Action]) -> Self {
        State(
            actions
                .iter()
                .enumerate()
                .map(|(k, a)| (a.bit() as u32) << k)
                .sum(),
        )
    }

    /// Parse a label like `"cdc"`; the first character is player 0.
    pub fn parse(label: &str) -> Result<Self> {
        let mut bits = 0u32;
        for (k, ch) in label.chars().enumerate() {
            match ch {
                'c' | 'C' => bits |= 1 << k,
                'd' | 'D' => {}
                other => {
                    return Err(Error::Domain(format!("invalid action symbol {other:?} in {label:?}")))
                }
            }
        }
        Ok(State(bits))
    }

    pub fn label(self, players: usize) -> String {
        (0..players).map(|k| self.action(k).symbol()).collect()
    }

    pub fn action(self, player: usize) -> Action {
        Action::from_bit(self.cooperates(player))
    }

    pub fn cooperates(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    /// Total number of cooperators `b`.
    pub fn cooperators(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn leader_cooperators(self, shape: &GameShape) -> usize {
        (self.0 & shape.leader_mask()).count_ones() as usize
    }

    pub fn follower_cooperators(self, shape: &GameShape) -> usize {
        (self.0 & !shape.leader_mask()).count_ones() as usize
    }

    /// The common action of the alliance, or `None` when its members disagree.
    pub fn alliance_action(self, shape: &GameShape) -> Option<Action> {
        let mask = shape.alliance_mask();
        match self.0 & mask {
            0 => Some(Action::Defect),
            m if m == mask => Some(Action::Cooperate),
            _ => None,
        }
    }
}

/// Payoff of a player choosing `action` while `cooperating_neighbors` of its
/// `neighbors` cooperate.
pub fn utility(action: Action, cooperating_neighbors: usize, neighbors: usize, r: f64) -> Result<f64> {
    if neighbors == 0 {
        return Err(Error::Domain("a player needs at least one neighbor to play".into()));
    }
    if cooperating_neighbors > neighbors {
        return Err(Error::Domain(format!(
            "{cooperating_neighbors} cooperating neighbors out of {neighbors}"
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("payoff scale r = {r} must be positive")));
    }
    let a = action.bit() as f64;
    Ok(r * (cooperating_neighbors as f64 + a) / (neighbors as f64 + 1.0) + (1.0 - a))
}

/// Defection dominates while mutual cooperation beats mutual defection exactly when `r > 1`.
pub fn is_social_dilemma(r: f64) -> bool {
    r > 1.0
}

/// Average payoffs of alliance members (`alliance`) and outsiders
/// (`outsiders`), one entry per state.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffVectors {
    pub alliance: Vec<f64>,
    pub outsiders: Vec<f64>,
}

impl PayoffVectors {
    pub fn alliance_at(&self, state: State) -> f64 {
        self.alliance[state.index()]
    }

    pub fn outsiders_at(&self, state: State) -> f64 {
        self.outsiders[state.index()]
    }
}

/// Per-group average of the individual payoffs in every state.
///
/// On states where the alliance acts in unison this coincides with
/// [`unison_payoffs`]; on split states it extends the same averages.
pub fn payoff_vectors(shape: &GameShape) -> PayoffVectors {
    let n = shape.players();
    let r = shape.r();
    let mut alliance = Vec::with_capacity(shape.state_count());
    let mut outsiders = Vec::with_capacity(shape.state_count());
    for state in shape.states() {
        let base = r * state.cooperators() as f64 / n as f64;
        let defectors_in = |range: std::ops::Range<usize>| {
            range.filter(|&k| !state.cooperates(k)).count() as f64
        };
        alliance.push(base + defectors_in(0..shape.alliance()) / shape.alliance() as f64);
        outsiders.push(base + defectors_in(shape.alliance()..n) / shape.outsiders() as f64);
    }
    PayoffVectors { alliance, outsiders }
}

/// Closed-form `(g^A, g^-A)` when the alliance plays `action` and there are
/// `cooperators` cooperators in total.
///
/// Returns `None` when the combination cannot occur (a cooperating alliance
/// with fewer than `n_A` cooperators, or a defecting one with more than `N − n_A`).
pub fn unison_payoffs(shape: &GameShape, action: Action, cooperators: usize) -> Option<(f64, f64)> {
    let n = shape.players() as f64;
    let na = shape.alliance();
    let outsiders = shape.outsiders() as f64;
    let b = cooperators;
    let base = shape.r() * b as f64 / n;
    match action {
        Action::Cooperate if (na..=shape.players()).contains(&b) => {
            let coop = (b - na) as f64;
            let defect = (shape.players() - b) as f64;
            Some((base, (coop * base + defect * (base + 1.0)) / outsiders))
        }
        Action::Defect if b <= shape.outsiders() => {
            let coop = b as f64;
            let defect = (shape.outsiders() - b) as f64;
            Some((base + 1.0, (coop * base + defect * (base + 1.0)) / outsiders))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2(r: f64) -> GameShape {
        GameShape::new(3, 2, 2, r).unwrap()
    }

    #[test]
    fn utility_matches_worked_example() {
        let r = 6.0;
        assert_relative_eq!(utility(Action::Cooperate, 1, 2, r).unwrap(), 2.0 * r / 3.0);
        assert_relative_eq!(utility(Action::Defect, 0, 2, r).unwrap(), 1.0);
        assert_relative_eq!(utility(Action::Cooperate, 2, 2, 9.0).unwrap(), 9.0);
    }

    #[test]
    fn utility_domain_errors() {
        assert!(utility(Action::Cooperate, 3, 2, 2.0).is_err());
        assert!(utility(Action::Cooperate, 0, 0, 2.0).is_err());
        assert!(utility(Action::Defect, 0, 1, 0.0).is_err());
    }

    #[test]
    fn dilemma_threshold() {
        assert!(is_social_dilemma(2.0));
        assert!(!is_social_dilemma(1.0));
        assert!(!is_social_dilemma(0.5));
    }

    #[test]
    fn individual_payoffs_match_listing() {
        // Player payoffs over ccc, ccd, cdc, cdd, dcc, dcd, ddc, ddd for r = 3.
        let r = 3.0;
        let expect_p1 = [r, 2.0 * r / 3.0, 2.0 * r / 3.0, r / 3.0, 2.0 * r / 3.0 + 1.0, r / 3.0 + 1.0, r / 3.0 + 1.0, 1.0];
        let labels = ["ccc", "ccd", "cdc", "cdd", "dcc", "dcd", "ddc", "ddd"];
        for (label, want) in labels.iter().zip(expect_p1) {
            let s = State::parse(label).unwrap();
            let others = s.cooperators() - s.action(0).bit();
            assert_relative_eq!(utility(s.action(0), others, 2, r).unwrap(), want);
        }
    }

    #[test]
    fn fig2_payoff_vectors() {
        let r = 9.0;
        let g = payoff_vectors(&fig2(r));
        let order = ["ccd", "ccc", "ddd", "ddc"];
        let alliance: Vec<f64> = order.iter().map(|s| g.alliance_at(State::parse(s).unwrap())).collect();
        let outsiders: Vec<f64> = order.iter().map(|s| g.outsiders_at(State::parse(s).unwrap())).collect();
        assert_eq!(alliance, vec![6.0, 9.0, 1.0, 4.0]);
        assert_eq!(outsiders, vec![7.0, 9.0, 1.0, 3.0]);

        // Symbolic form for a second r: [2r/3, r, 1, r/3 + 1] and [2r/3 + 1, r, 1, r/3].
        let r = 4.5;
        let g = payoff_vectors(&fig2(r));
        let a: Vec<f64> = order.iter().map(|s| g.alliance_at(State::parse(s).unwrap())).collect();
        let o: Vec<f64> = order.iter().map(|s| g.outsiders_at(State::parse(s).unwrap())).collect();
        let want_a = [2.0 * r / 3.0, r, 1.0, r / 3.0 + 1.0];
        let want_o = [2.0 * r / 3.0 + 1.0, r, 1.0, r / 3.0];
        for i in 0..4 {
            assert_relative_eq!(a[i], want_a[i], epsilon = 1e-12);
            assert_relative_eq!(o[i], want_o[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn general_vectors_reduce_to_closed_form_on_unison_states() {
        for n in 2..=6 {
            for nl in 1..=n {
                for na in 1..=nl.min(n - 1) {
                    let shape = GameShape::new(n, nl, na, 2.0 * n as f64 + 3.0).unwrap();
                    let g = payoff_vectors(&shape);
                    for s in shape.states() {
                        if let Some(action) = s.alliance_action(&shape) {
                            let (ga, gna) = unison_payoffs(&shape, action, s.cooperators()).unwrap();
                            assert_relative_eq!(g.alliance_at(s), ga, epsilon = 1e-12);
                            assert_relative_eq!(g.outsiders_at(s), gna, epsilon = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn payoff_identity_holds_exhaustively() {
        for n in 2..=6 {
            for na in 1..n {
                let r = 1.7 + n as f64;
                let shape = GameShape::new(n, n, na, r).unwrap();
                let g = payoff_vectors(&shape);
                for s in shape.states() {
                    let total: f64 = (0..n)
                        .map(|k| {
                            let others = s.cooperators() - s.action(k).bit();
                            utility(s.action(k), others, n - 1, r).unwrap()
                        })
                        .sum();
                    let grouped = na as f64 * g.alliance_at(s) + (n - na) as f64 * g.outsiders_at(s);
                    assert_relative_eq!(total, grouped, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn shape_validation() {
        assert!(GameShape::new(1, 1, 1, 2.0).is_err());
        assert!(GameShape::new(3, 3, 3, 2.0).is_err());
        assert!(GameShape::new(3, 1, 2, 2.0).is_err());
        assert!(GameShape::new(3, 2, 0, 2.0).is_err());
        assert!(GameShape::new(3, 2, 2, -1.0).is_err());
        assert!(GameShape::new(3, 3, 2, 9.0).is_ok());
    }

    #[test]
    fn state_labels_round_trip() {
        let s = State::parse("cdc").unwrap();
        assert_eq!(s.0, 0b101);
        assert_eq!(s.label(3), "cdc");
        let shape = fig2(9.0);
        assert_eq!(s.alliance_action(&shape), None);
        assert_eq!(State::parse("ccd").unwrap().alliance_action(&shape), Some(Action::Cooperate));
        assert_eq!(State::parse("ddc").unwrap().alliance_action(&shape), Some(Action::Defect));
    }

    #[test]
    fn scale_evaluation() {
        let lin = PayoffScale::linear_default();
        assert_eq!(lin.eval(3), 9.0);
        let quad = PayoffScale::quadratic_default();
        assert_eq!(quad.eval(3), 21.0);
        assert!(PayoffScale::new(1.0, 3, 0.0).is_err());
        assert!(PayoffScale::new(-1.0, 1, 0.0).is_err());
        assert!(lin.is_dilemma_everywhere());
        assert!(!PayoffScale::new(0.0, 1, 1.0).unwrap().is_dilemma_everywhere());
    }
}
