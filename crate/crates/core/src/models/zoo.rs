//! The three shipped models with their default parameter sets.

use super::EventKind::{Liftoff, Touchdown};
use super::{
    ActuationKind, Foot, FreeParam, Inertia, ModelError, ModelSpec, ParallelActuator, ParamSet, PhaseSpec, PointExpr,
    PointMass, Rest, Spring, Term, Transition,
};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    PrismaticMonopod,
    SegmentedMonopod,
    SagittalQuadruped,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::PrismaticMonopod,
        ModelKind::SegmentedMonopod,
        ModelKind::SagittalQuadruped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::PrismaticMonopod => "prismatic-monopod",
            ModelKind::SegmentedMonopod => "segmented-monopod",
            ModelKind::SagittalQuadruped => "sagittal-quadruped",
        }
    }

    pub fn default_params(self) -> ParamSet {
        match self {
            ModelKind::PrismaticMonopod => prismatic_params(),
            ModelKind::SegmentedMonopod => segmented_params(),
            ModelKind::SagittalQuadruped => quadruped_params(),
        }
    }

    pub fn build(self, params: &ParamSet) -> Result<ModelSpec, ModelError> {
        params.validate()?;
        Ok(match self {
            ModelKind::PrismaticMonopod => build_prismatic(params),
            ModelKind::SegmentedMonopod => build_segmented(params),
            ModelKind::SagittalQuadruped => build_quadruped(params),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

/// Builds a model by name with parameter overrides applied.
pub fn build_model(name: &str, overrides: &[(String, f64)]) -> Result<ModelSpec, ModelError> {
    let kind: ModelKind = name.parse()?;
    let mut params = kind.default_params();
    for (k, v) in overrides {
        params.set(k, *v)?;
    }
    kind.build(&params)
}

pub fn prismatic_monopod() -> ModelSpec {
    build_prismatic(&prismatic_params())
}

pub fn segmented_monopod() -> ModelSpec {
    build_segmented(&segmented_params())
}

pub fn sagittal_quadruped() -> ModelSpec {
    build_quadruped(&quadruped_params())
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn state_names(q: &[&str]) -> Vec<String> {
    let mut out = names(q);
    out.extend(q.iter().map(|s| format!("d{s}")));
    out
}

fn mass(name: &str, mass: f64, point: PointExpr) -> PointMass {
    PointMass {
        name: name.into(),
        mass,
        point,
    }
}

fn inertia(name: &str, inertia: f64, angles: &[usize]) -> Inertia {
    Inertia {
        name: name.into(),
        inertia,
        angles: angles.to_vec(),
    }
}

fn prismatic_params() -> ParamSet {
    ParamSet::new(
        "prismatic-monopod",
        &[
            ("m_B", 0.7),
            ("m_L", 0.2),
            ("m_F", 0.1),
            ("j_B", 0.4),
            ("j_L", 0.004),
            ("k_H", 1.0),
            ("d_H", 0.02),
            ("k_L", 20.0),
            ("d_L", 0.85),
            ("l_0", 1.0),
            ("g", 1.0),
        ],
    )
}

// q = [x, z, phi, alpha, l]
fn build_prismatic(p: &ParamSet) -> ModelSpec {
    let foot = PointExpr::base().with(Term::scaled(&[2, 3], 4, [0.0, -1.0]));
    ModelSpec {
        name: "prismatic-monopod".into(),
        n_q: 5,
        n_u: 2,
        state_names: state_names(&["x", "z", "phi", "alpha", "l"]),
        control_names: names(&["u_alpha", "u_l"]),
        phases: vec![
            PhaseSpec {
                id: 0,
                name: "flight".into(),
                contacts: vec![],
                events: vec![Transition {
                    target: 1,
                    kind: Touchdown { foot: 0 },
                }],
            },
            PhaseSpec {
                id: 1,
                name: "stance".into(),
                contacts: vec![0],
                events: vec![Transition {
                    target: 0,
                    kind: Liftoff { foot: 0 },
                }],
            },
        ],
        params: p.clone(),
        actuation_kind: ActuationKind::ParallelTorque,
        gravity: p.get("g"),
        masses: vec![
            mass("body", p.get("m_B"), PointExpr::base()),
            mass("leg", p.get("m_L"), PointExpr::base()),
            mass("foot", p.get("m_F"), foot.clone()),
        ],
        inertias: vec![
            inertia("body", p.get("j_B"), &[2]),
            inertia("leg", p.get("j_L"), &[2, 3]),
        ],
        springs: vec![
            Spring {
                name: "hip".into(),
                coeffs: vec![(3, 1.0)],
                rest: Rest::Fixed(0.0),
                stiffness: p.get("k_H"),
                damping: p.get("d_H"),
                motor: None,
            },
            Spring {
                name: "leg".into(),
                coeffs: vec![(4, 1.0)],
                rest: Rest::Fixed(p.get("l_0")),
                stiffness: p.get("k_L"),
                damping: p.get("d_L"),
                motor: None,
            },
        ],
        parallel: vec![
            ParallelActuator { motor: 0, coord: 3 },
            ParallelActuator { motor: 1, coord: 4 },
        ],
        feet: vec![Foot {
            name: "foot".into(),
            point: foot,
        }],
        free_params: vec![],
        aperiodic: vec![0],
        gated_motors: vec![],
    }
}

fn segmented_params() -> ParamSet {
    ParamSet::new(
        "segmented-monopod",
        &[
            ("m_B", 0.8399),
            ("m_L1", 0.0821),
            ("m_L2", 0.0780),
            ("m_F", 1e-10),
            ("j_B", 0.0146),
            ("j_L1", 0.0044),
            ("j_L2", 1.759e-4),
            ("k_1", 1.2695),
            ("d_1", 0.1390),
            ("alpha_01", -0.2),
            ("k_2", 1.3340),
            ("d_2", 0.0360),
            ("alpha_02", 0.35),
            ("l_1", 0.5),
            ("l_2", 0.5),
            ("x_J", 0.0),
            ("z_J", 0.0),
            ("x_L1", 0.0),
            ("z_L1", -0.1375),
            ("x_L2", -0.0833),
            ("z_L2", -0.1667),
            ("g", 1.0),
        ],
    )
}

// q = [x, z, phi, alpha1, alpha2]
fn build_segmented(p: &ParamSet) -> ModelSpec {
    let hip = Term::rigid(&[2], [p.get("x_J"), p.get("z_J")]);
    let thigh = |o: [f64; 2]| Term::rigid(&[2, 3], o);
    let shank = |o: [f64; 2]| Term::rigid(&[2, 3, 4], o);
    let knee = thigh([0.0, -p.get("l_1")]);
    let foot = PointExpr::base()
        .with(hip.clone())
        .with(knee.clone())
        .with(shank([0.0, -p.get("l_2")]));
    ModelSpec {
        name: "segmented-monopod".into(),
        n_q: 5,
        n_u: 2,
        state_names: state_names(&["x", "z", "phi", "alpha1", "alpha2"]),
        control_names: names(&["u_alpha1", "u_alpha2"]),
        phases: vec![
            PhaseSpec {
                id: 0,
                name: "flight".into(),
                contacts: vec![],
                events: vec![Transition {
                    target: 1,
                    kind: Touchdown { foot: 0 },
                }],
            },
            PhaseSpec {
                id: 1,
                name: "stance".into(),
                contacts: vec![0],
                events: vec![Transition {
                    target: 0,
                    kind: Liftoff { foot: 0 },
                }],
            },
        ],
        params: p.clone(),
        actuation_kind: ActuationKind::SeriesElasticPosition,
        gravity: p.get("g"),
        masses: vec![
            mass("body", p.get("m_B"), PointExpr::base()),
            mass(
                "upper-leg",
                p.get("m_L1"),
                PointExpr::base()
                    .with(hip.clone())
                    .with(thigh([p.get("x_L1"), p.get("z_L1")])),
            ),
            mass(
                "lower-leg",
                p.get("m_L2"),
                PointExpr::base()
                    .with(hip.clone())
                    .with(knee)
                    .with(shank([p.get("x_L2"), p.get("z_L2")])),
            ),
            mass("foot", p.get("m_F"), foot.clone()),
        ],
        inertias: vec![
            inertia("body", p.get("j_B"), &[2]),
            inertia("upper-leg", p.get("j_L1"), &[2, 3]),
            inertia("lower-leg", p.get("j_L2"), &[2, 3, 4]),
        ],
        springs: vec![
            Spring {
                name: "joint1".into(),
                coeffs: vec![(3, 1.0)],
                rest: Rest::Free(0),
                stiffness: p.get("k_1"),
                damping: p.get("d_1"),
                motor: Some(0),
            },
            Spring {
                name: "joint2".into(),
                coeffs: vec![(3, 1.0), (4, 1.0)],
                rest: Rest::Fixed(p.get("alpha_02")),
                stiffness: p.get("k_2"),
                damping: p.get("d_2"),
                motor: Some(1),
            },
        ],
        parallel: vec![],
        feet: vec![Foot {
            name: "foot".into(),
            point: foot,
        }],
        free_params: vec![FreeParam {
            name: "alpha_01".into(),
            value: p.get("alpha_01"),
        }],
        aperiodic: vec![0],
        gated_motors: vec![],
    }
}

fn quadruped_params() -> ParamSet {
    ParamSet::new(
        "sagittal-quadruped",
        &[
            ("m_B", 0.8797),
            ("m_u", 0.0430),
            ("m_l", 0.0172),
            ("m_F", 0.0),
            ("j_B", 0.7744),
            ("j_u", 8.9826e-4),
            ("j_l", 3.6201e-4),
            ("k", 0.9472),
            ("d", 0.038),
            ("alpha_0u", -0.4),
            ("alpha_0l", 0.4),
            ("l_u", 0.5),
            ("l_l", 0.5),
            ("x_Jh", -0.9375),
            ("x_Jf", 0.9375),
            ("z_J", -0.2012),
            ("x_u", 0.0010),
            ("z_u", -0.2110),
            ("x_l", 0.0),
            ("z_l", -0.2398),
            ("g", 1.0),
        ],
    )
}

// q = [x, z, phi, alpha_hu, alpha_hl, alpha_fu, alpha_fl]
fn build_quadruped(p: &ParamSet) -> ModelSpec {
    struct Leg {
        upper: PointExpr,
        lower: PointExpr,
        foot: PointExpr,
    }
    let leg = |x_joint: f64, au: usize, al: usize| {
        let hip = Term::rigid(&[2], [x_joint, p.get("z_J")]);
        let knee = Term::rigid(&[2, au], [0.0, -p.get("l_u")]);
        Leg {
            upper: PointExpr::base()
                .with(hip.clone())
                .with(Term::rigid(&[2, au], [p.get("x_u"), p.get("z_u")])),
            lower: PointExpr::base()
                .with(hip.clone())
                .with(knee.clone())
                .with(Term::rigid(&[2, au, al], [p.get("x_l"), p.get("z_l")])),
            foot: PointExpr::base()
                .with(hip)
                .with(knee)
                .with(Term::rigid(&[2, au, al], [0.0, -p.get("l_l")])),
        }
    };
    let hind = leg(p.get("x_Jh"), 3, 4);
    let front = leg(p.get("x_Jf"), 5, 6);
    let spring = |name: &str, coeffs: Vec<(usize, f64)>, rest: &str, motor: usize| Spring {
        name: name.into(),
        coeffs,
        rest: Rest::Fixed(p.get(rest)),
        stiffness: p.get("k"),
        damping: p.get("d"),
        motor: Some(motor),
    };
    let phase = |id: usize, name: &str, contacts: Vec<usize>, events: Vec<(usize, super::EventKind)>| PhaseSpec {
        id,
        name: name.into(),
        contacts,
        events: events
            .into_iter()
            .map(|(target, kind)| Transition { target, kind })
            .collect(),
    };
    const HIND: usize = 0;
    const FRONT: usize = 1;
    ModelSpec {
        name: "sagittal-quadruped".into(),
        n_q: 7,
        n_u: 4,
        state_names: state_names(&["x", "z", "phi", "alpha_hu", "alpha_hl", "alpha_fu", "alpha_fl"]),
        control_names: names(&["u_hu", "u_hl", "u_fu", "u_fl"]),
        phases: vec![
            phase(
                0,
                "flight",
                vec![],
                vec![(1, Touchdown { foot: HIND }), (2, Touchdown { foot: FRONT })],
            ),
            phase(
                1,
                "hind-support",
                vec![HIND],
                vec![(3, Touchdown { foot: FRONT }), (0, Liftoff { foot: HIND })],
            ),
            phase(
                2,
                "front-support",
                vec![FRONT],
                vec![(3, Touchdown { foot: HIND }), (0, Liftoff { foot: FRONT })],
            ),
            phase(
                3,
                "double-support",
                vec![HIND, FRONT],
                vec![(2, Liftoff { foot: HIND }), (1, Liftoff { foot: FRONT })],
            ),
        ],
        params: p.clone(),
        actuation_kind: ActuationKind::SeriesElasticPosition,
        gravity: p.get("g"),
        masses: vec![
            mass("body", p.get("m_B"), PointExpr::base()),
            mass("hind-upper", p.get("m_u"), hind.upper),
            mass("hind-lower", p.get("m_l"), hind.lower),
            mass("hind-foot", p.get("m_F"), hind.foot.clone()),
            mass("front-upper", p.get("m_u"), front.upper),
            mass("front-lower", p.get("m_l"), front.lower),
            mass("front-foot", p.get("m_F"), front.foot.clone()),
        ],
        inertias: vec![
            inertia("body", p.get("j_B"), &[2]),
            inertia("hind-upper", p.get("j_u"), &[2, 3]),
            inertia("hind-lower", p.get("j_l"), &[2, 3, 4]),
            inertia("front-upper", p.get("j_u"), &[2, 5]),
            inertia("front-lower", p.get("j_l"), &[2, 5, 6]),
        ],
        springs: vec![
            spring("hind-hip", vec![(3, 1.0)], "alpha_0u", 0),
            spring("hind-knee", vec![(3, 1.0), (4, 1.0)], "alpha_0l", 1),
            spring("front-hip", vec![(5, 1.0)], "alpha_0u", 2),
            spring("front-knee", vec![(5, 1.0), (6, 1.0)], "alpha_0l", 3),
        ],
        parallel: vec![],
        feet: vec![
            Foot {
                name: "hind".into(),
                point: hind.foot,
            },
            Foot {
                name: "front".into(),
                point: front.foot,
            },
        ],
        free_params: vec![],
        aperiodic: vec![0],
        gated_motors: vec![(0, HIND), (1, HIND), (2, FRONT), (3, FRONT)],
    }
}
