//! Latent potential-outcome table and the consistency mapping to the
//! observed single-world view.
//!
//! Every potential quantity is stored as a pair indexed by the treatment
//! actually taken (`0` = control, `1` = experimental). Assignment `r` picks
//! a treatment through `x_under`, and the observed record then reads only
//! that treatment's component.

use std::fmt;

use crate::scalar::Real;

/// Index of a binary treatment or assignment in a potential pair.
#[inline]
pub fn arm_index(b: bool) -> usize {
    usize::from(b)
}

/// Assessment time of the endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assessment {
    T1,
    T2,
}

impl Assessment {
    pub fn as_str(self) -> &'static str {
        match self {
            Assessment::T1 => "t1",
            Assessment::T2 => "t2",
        }
    }
}

impl fmt::Display for Assessment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Death timing relative to the two assessments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DeathTime {
    None,
    /// Survives the first assessment, dies before the second.
    BetweenT1T2,
    /// Dies before the first assessment (hence by the second).
    ByT2BeforeT1,
}

impl DeathTime {
    pub fn as_str(self) -> &'static str {
        match self {
            DeathTime::None => "none",
            DeathTime::BetweenT1T2 => "between_t1_t2",
            DeathTime::ByT2BeforeT1 => "by_t2_before_t1",
        }
    }

    pub fn is_dead(self) -> bool {
        self != DeathTime::None
    }
}

impl fmt::Display for DeathTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Intercurrent-event pattern of a record.
///
/// * `Case1`: concomitant therapy used, alive, still in study; both assessments available.
/// * `Case2`: death before the first assessment; no assessment available.
/// * `Case3`: death between the assessments; only the first assessment available.
/// * `Case4`: withdrawal for intolerance; no assessment available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IceCase {
    None,
    Case1,
    Case2,
    Case3,
    Case4,
}

impl IceCase {
    /// Total decision table. Early death dominates withdrawal, withdrawal
    /// dominates late death, and therapy use only counts for participants
    /// who stay alive and in study.
    pub fn classify(death: DeathTime, withdrawn: bool, therapy: bool) -> Self {
        match (death, withdrawn) {
            (DeathTime::ByT2BeforeT1, _) => IceCase::Case2,
            (_, true) => IceCase::Case4,
            (DeathTime::BetweenT1T2, false) => IceCase::Case3,
            (DeathTime::None, false) if therapy => IceCase::Case1,
            (DeathTime::None, false) => IceCase::None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IceCase::None => "none",
            IceCase::Case1 => "case1",
            IceCase::Case2 => "case2",
            IceCase::Case3 => "case3",
            IceCase::Case4 => "case4",
        }
    }

    pub fn has_t1(self) -> bool {
        !matches!(self, IceCase::Case2 | IceCase::Case4)
    }

    pub fn has_t2(self) -> bool {
        matches!(self, IceCase::None | IceCase::Case1)
    }
}

impl fmt::Display for IceCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Latent tolerability stratum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrincipalStratum {
    /// Tolerates both treatments.
    P1,
    /// Tolerates neither.
    P2,
    /// Tolerates control only.
    P3,
    /// Tolerates the experimental treatment only.
    P4,
}

impl PrincipalStratum {
    pub const ALL: [PrincipalStratum; 4] = [
        PrincipalStratum::P1,
        PrincipalStratum::P2,
        PrincipalStratum::P3,
        PrincipalStratum::P4,
    ];

    /// Stratum for tolerability under (control, experimental).
    pub fn from_tolerability(t: [bool; 2]) -> Self {
        match t {
            [true, true] => PrincipalStratum::P1,
            [false, false] => PrincipalStratum::P2,
            [true, false] => PrincipalStratum::P3,
            [false, true] => PrincipalStratum::P4,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            PrincipalStratum::P1 => "P1",
            PrincipalStratum::P2 => "P2",
            PrincipalStratum::P3 => "P3",
            PrincipalStratum::P4 => "P4",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            PrincipalStratum::P1 => "tolerate_both",
            PrincipalStratum::P2 => "tolerate_neither",
            PrincipalStratum::P3 => "tolerate_control_only",
            PrincipalStratum::P4 => "tolerate_experimental_only",
        }
    }

    /// Accepts either the short (`P1`) or descriptive (`tolerate_both`) name.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.short_name() == name || s.long_name() == name)
    }
}

impl fmt::Display for PrincipalStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// One row of the latent potential-outcome table.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialParticipant<T> {
    pub id: usize,
    /// Baseline confounders on a standardized scale.
    pub c: Vec<T>,
    /// Member of the target population.
    pub s: bool,
    /// Randomized assignment (`true` = experimental arm).
    pub r: bool,
    /// Treatment taken under assignment to control / experimental.
    pub x_under: [bool; 2],
    /// Endpoint at the first assessment under each treatment.
    pub y1_under: [T; 2],
    /// Endpoint at the second assessment under each treatment, including any
    /// concomitant-therapy effect.
    pub y2_under: [T; 2],
    /// Second-assessment endpoint with concomitant therapy forced off.
    pub y2_free: [T; 2],
    pub m_under: [bool; 2],
    pub death_under: [DeathTime; 2],
    /// Tolerability of each treatment.
    pub t_under: [bool; 2],
    /// Withdrawal for intolerance under each treatment.
    pub withdraw_under: [bool; 2],
    /// Protocol deviation under each treatment.
    pub deviation_under: [bool; 2],
    /// Took at least one dose.
    pub dosed: bool,
}

impl<T: Real> PotentialParticipant<T> {
    /// Treatment taken under the realized assignment.
    pub fn x_taken(&self) -> bool {
        self.x_under[arm_index(self.r)]
    }

    /// Intercurrent-event pattern the participant would show on treatment `x`.
    pub fn case_under(&self, x: bool) -> IceCase {
        let i = arm_index(x);
        IceCase::classify(self.death_under[i], self.withdraw_under[i], self.m_under[i])
    }
}

/// Analysis-set indicator flags carried by an observed record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SetFlags {
    pub enrolled: bool,
    pub any_dose: bool,
    pub post_randomization_data: bool,
    pub protocol_deviation: bool,
}

/// Single-world view of a participant.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedRecord<T> {
    pub id: usize,
    pub c: Vec<T>,
    pub r_obs: bool,
    pub x_obs: bool,
    pub m_obs: bool,
    pub death_obs: DeathTime,
    /// Tolerability of the treatment actually taken.
    pub t_obs: bool,
    pub y1_obs: Option<T>,
    pub y2_obs: Option<T>,
    pub case: IceCase,
    pub set_flags: SetFlags,
}

impl<T: Real> ObservedRecord<T> {
    pub fn endpoint(&self, at: Assessment) -> Option<T> {
        match at {
            Assessment::T1 => self.y1_obs,
            Assessment::T2 => self.y2_obs,
        }
    }
}

/// Applies the consistency rule: every observed quantity is the potential
/// quantity indexed by the treatment taken under the realized assignment,
/// censored according to the intercurrent-event pattern.
pub fn derive_observed<T: Real>(p: &PotentialParticipant<T>) -> ObservedRecord<T> {
    let x = p.x_taken();
    let i = arm_index(x);
    let case = p.case_under(x);
    let y1_obs = case.has_t1().then_some(p.y1_under[i]);
    let y2_obs = case.has_t2().then_some(p.y2_under[i]);
    ObservedRecord {
        id: p.id,
        c: p.c.clone(),
        r_obs: p.r,
        x_obs: x,
        m_obs: p.m_under[i],
        death_obs: p.death_under[i],
        t_obs: p.t_under[i],
        y1_obs,
        y2_obs,
        case,
        set_flags: SetFlags {
            enrolled: p.s,
            any_dose: p.dosed,
            post_randomization_data: y1_obs.is_some() || y2_obs.is_some(),
            protocol_deviation: p.deviation_under[i],
        },
    }
}

/// Observed view of a whole population.
pub fn derive_all<T: Real>(pop: &[PotentialParticipant<T>]) -> Vec<ObservedRecord<T>> {
    pop.iter().map(derive_observed).collect()
}

/// Treated-minus-control difference of the selected potential endpoint.
pub fn individual_effect<T: Real>(p: &PotentialParticipant<T>, at: Assessment) -> T {
    match at {
        Assessment::T1 => p.y1_under[1] - p.y1_under[0],
        Assessment::T2 => p.y2_under[1] - p.y2_under[0],
    }
}

pub fn stratum_of<T>(p: &PotentialParticipant<T>) -> PrincipalStratum {
    PrincipalStratum::from_tolerability(p.t_under)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// A participant with no intercurrent events and full compliance.
    pub fn plain(id: usize, r: bool, y1: [f64; 2], y2: [f64; 2]) -> PotentialParticipant<f64> {
        PotentialParticipant {
            id,
            c: vec![0.0],
            s: true,
            r,
            x_under: [false, true],
            y1_under: y1,
            y2_under: y2,
            y2_free: y2,
            m_under: [false; 2],
            death_under: [DeathTime::None; 2],
            t_under: [true; 2],
            withdraw_under: [false; 2],
            deviation_under: [false; 2],
            dosed: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::plain;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn consistency_selects_assigned_component() {
        let p = plain(1, true, [2.0, 2.5], [3.0, 5.0]);
        let o = derive_observed(&p);
        assert!(o.x_obs);
        assert_eq!(o.y2_obs, Some(5.0));
        assert_eq!(o.case, IceCase::None);
    }

    #[test]
    fn early_death_in_control_censors_both_assessments() {
        let mut p = plain(1, false, [2.0, 2.5], [3.0, 5.0]);
        p.death_under[0] = DeathTime::ByT2BeforeT1;
        let o = derive_observed(&p);
        assert_eq!(o.y1_obs, None);
        assert_eq!(o.y2_obs, None);
        assert_eq!(o.case, IceCase::Case2);
        assert!(!o.set_flags.post_randomization_data);
    }

    #[test]
    fn hand_table_of_four() {
        // 1: treated, therapy on treatment -> case1, both assessments.
        let mut a = plain(1, true, [1.0, 2.0], [3.0, 4.0]);
        a.m_under = [false, true];
        // 2: control, late death under control -> case3, y1 only.
        let mut b = plain(2, false, [5.0, 6.0], [7.0, 8.0]);
        b.death_under = [DeathTime::BetweenT1T2, DeathTime::None];
        // 3: treated, intolerant and withdrawn -> case4.
        let mut c = plain(3, true, [1.5, 2.5], [3.5, 4.5]);
        c.t_under = [true, false];
        c.withdraw_under = [false, true];
        // 4: control, the experimental arm's early death must not leak.
        let mut d = plain(4, false, [0.5, 0.7], [0.9, 1.1]);
        d.death_under = [DeathTime::None, DeathTime::ByT2BeforeT1];
        d.deviation_under = [true, false];

        let got: Vec<_> = [a, b, c, d].iter().map(derive_observed).collect();
        // x, m, y1, y2, case, data, deviation
        type Row = (bool, bool, Option<f64>, Option<f64>, IceCase, bool, bool);
        let expect: [Row; 4] = [
            (true, true, Some(2.0), Some(4.0), IceCase::Case1, true, false),
            (false, false, Some(5.0), None, IceCase::Case3, true, false),
            (true, false, None, None, IceCase::Case4, false, false),
            (false, false, Some(0.5), Some(0.9), IceCase::None, true, true),
        ];
        for (o, e) in got.iter().zip(expect) {
            assert_eq!(o.x_obs, e.0, "id {}", o.id);
            assert_eq!(o.m_obs, e.1, "id {}", o.id);
            assert_eq!(o.y1_obs, e.2, "id {}", o.id);
            assert_eq!(o.y2_obs, e.3, "id {}", o.id);
            assert_eq!(o.case, e.4, "id {}", o.id);
            assert_eq!(o.set_flags.post_randomization_data, e.5, "id {}", o.id);
            assert_eq!(o.set_flags.protocol_deviation, e.6, "id {}", o.id);
        }
        assert!(!got[2].t_obs);
    }

    #[test]
    fn individual_effects() {
        assert_eq!(individual_effect(&plain(1, true, [0.0; 2], [3.0, 5.0]), Assessment::T2), 2.0);
        assert_eq!(individual_effect(&plain(1, true, [0.0; 2], [4.0, 4.0]), Assessment::T2), 0.0);
        assert_eq!(individual_effect(&plain(1, true, [1.0, 1.5], [4.0, 4.0]), Assessment::T1), 0.5);
    }

    #[test]
    fn hand_table_ate() {
        let y2 = [[3.0, 5.0], [4.0, 4.0], [6.0, 5.5], [2.0, 4.5], [7.0, 9.0], [1.0, 1.0]];
        let pop: Vec<_> = y2
            .iter()
            .enumerate()
            .map(|(i, &y)| plain(i, i % 2 == 0, [0.0; 2], y))
            .collect();
        let ate: f64 = pop.iter().map(|p| individual_effect(p, Assessment::T2)).sum::<f64>() / 6.0;
        // (2 + 0 - 0.5 + 2.5 + 2 + 0) / 6
        assert!((ate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stratum_table() {
        let mut p = plain(1, true, [0.0; 2], [0.0; 2]);
        let mut counts = [0usize; 4];
        for t0 in [false, true] {
            for t1 in [false, true] {
                p.t_under = [t0, t1];
                let s = stratum_of(&p);
                counts[s as usize] += 1;
                let expect = match (t0, t1) {
                    (true, true) => PrincipalStratum::P1,
                    (false, false) => PrincipalStratum::P2,
                    (true, false) => PrincipalStratum::P3,
                    (false, true) => PrincipalStratum::P4,
                };
                assert_eq!(s, expect);
            }
        }
        assert_eq!(counts, [1, 1, 1, 1]);
        assert_eq!(PrincipalStratum::from_name("tolerate_both"), Some(PrincipalStratum::P1));
        assert_eq!(PrincipalStratum::from_name("P3"), Some(PrincipalStratum::P3));
        assert_eq!(PrincipalStratum::from_name("p1"), None);
    }

    #[test]
    fn case_table_is_total_and_respects_censoring() {
        let deaths = [DeathTime::None, DeathTime::BetweenT1T2, DeathTime::ByT2BeforeT1];
        for d in deaths {
            for w in [false, true] {
                for m in [false, true] {
                    let c = IceCase::classify(d, w, m);
                    if d.is_dead() || c == IceCase::Case4 {
                        assert!(!c.has_t2());
                    }
                    if c == IceCase::Case1 {
                        assert!(m && !w && !d.is_dead());
                    }
                }
            }
        }
    }

    fn arb_death() -> impl Strategy<Value = DeathTime> {
        prop_oneof![
            Just(DeathTime::None),
            Just(DeathTime::BetweenT1T2),
            Just(DeathTime::ByT2BeforeT1)
        ]
    }

    prop_compose! {
        fn arb_participant()(
            r in any::<bool>(),
            y in prop::array::uniform4(0.0f64..10.0),
            free in prop::array::uniform2(0.0f64..10.0),
            m in any::<[bool; 2]>(),
            d0 in arb_death(), d1 in arb_death(),
            t in any::<[bool; 2]>(),
            w in any::<[bool; 2]>(),
            dev in any::<[bool; 2]>(),
            c in prop::collection::vec(-3.0f64..3.0, 2),
        ) -> PotentialParticipant<f64> {
            PotentialParticipant {
                id: 0, c, s: true, r, x_under: [false, true],
                y1_under: [y[0], y[1]], y2_under: [y[2], y[3]], y2_free: free,
                m_under: m, death_under: [d0, d1], t_under: t,
                withdraw_under: [w[0] && !t[0], w[1] && !t[1]],
                deviation_under: dev, dosed: true,
            }
        }
    }

    proptest! {
        #[test]
        fn consistency_holds(p in arb_participant()) {
            let o = derive_observed(&p);
            let i = arm_index(p.r);
            prop_assert_eq!(o.x_obs, p.x_under[i]);
            if let Some(y2) = o.y2_obs {
                prop_assert_eq!(y2, p.y2_under[arm_index(o.x_obs)]);
            }
            if o.death_obs.is_dead() || o.case == IceCase::Case4 {
                prop_assert!(o.y2_obs.is_none());
            }
            prop_assert_eq!(o.y1_obs.is_some(), !matches!(o.case, IceCase::Case2 | IceCase::Case4));
        }

        #[test]
        fn counterfactual_arm_never_leaks(p in arb_participant(), junk in 0.0f64..10.0) {
            let mut q = p.clone();
            let other = 1 - arm_index(p.x_taken());
            q.y1_under[other] = junk;
            q.y2_under[other] = junk;
            q.y2_free[other] = junk;
            q.m_under[other] = !q.m_under[other];
            q.death_under[other] = DeathTime::ByT2BeforeT1;
            q.t_under[other] = !q.t_under[other];
            q.withdraw_under[other] = !q.withdraw_under[other];
            q.deviation_under[other] = !q.deviation_under[other];
            prop_assert_eq!(derive_observed(&p), derive_observed(&q));
        }
    }
}
