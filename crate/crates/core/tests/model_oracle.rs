//! Mass matrix and generalized forces against values frozen from the
//! symbolic Lagrangian derivation in `oracles/lagrangian_oracle.py`.

#![allow(clippy::excessive_precision)]

use gaitforge::models::{
    generalized_forces, mass_matrix, prismatic_monopod, sagittal_quadruped, segmented_monopod, ModelSpec,
};

const PRISMATIC_A_M: [f64; 25] = [
    9.99999999999999889e-01,
    0.00000000000000000e0,
    9.39845049059325477e-02,
    9.39845049059325477e-02,
    2.47403959254522965e-02,
    0.00000000000000000e0,
    9.99999999999999889e-01,
    2.39981840476887268e-02,
    2.39981840476887268e-02,
    -9.68912421710644844e-02,
    9.39845049059325477e-02,
    2.39981840476887268e-02,
    4.98089999999999977e-01,
    9.80900000000000105e-02,
    0.00000000000000000e0,
    9.39845049059325477e-02,
    2.39981840476887268e-02,
    9.80900000000000105e-02,
    9.80900000000000105e-02,
    0.00000000000000000e0,
    2.47403959254522965e-02,
    -9.68912421710644844e-02,
    0.00000000000000000e0,
    0.00000000000000000e0,
    1.00000000000000006e-01,
];
const PRISMATIC_A_N: [f64; 5] = [
    -1.13869672200508538e-02,
    -1.00390869256011350e0,
    -3.56381840476887174e-02,
    -1.31638184047688761e-01,
    1.00786124217106599e0,
];
const PRISMATIC_REST_M: [f64; 25] = [
    9.99999999999999889e-01,
    0.00000000000000000e0,
    1.00000000000000006e-01,
    1.00000000000000006e-01,
    0.00000000000000000e0,
    0.00000000000000000e0,
    9.99999999999999889e-01,
    0.00000000000000000e0,
    0.00000000000000000e0,
    -1.00000000000000006e-01,
    1.00000000000000006e-01,
    0.00000000000000000e0,
    5.04000000000000004e-01,
    1.04000000000000009e-01,
    0.00000000000000000e0,
    1.00000000000000006e-01,
    0.00000000000000000e0,
    1.04000000000000009e-01,
    1.04000000000000009e-01,
    0.00000000000000000e0,
    0.00000000000000000e0,
    -1.00000000000000006e-01,
    0.00000000000000000e0,
    0.00000000000000000e0,
    1.00000000000000006e-01,
];
const PRISMATIC_REST_N: [f64; 5] = [
    0.00000000000000000e0,
    -9.99999999999999889e-01,
    0.00000000000000000e0,
    0.00000000000000000e0,
    1.00000000000000006e-01,
];
const SEGMENTED_A_M: [f64; 25] = [
    1.00000000009999979e0,
    0.00000000000000000e0,
    6.39185014520898404e-02,
    6.39185014520898404e-02,
    1.44422318971990128e-02,
    0.00000000000000000e0,
    1.00000000009999979e0,
    -1.06480906856588099e-02,
    -1.06480906856588099e-02,
    -1.64491721608941641e-03,
    6.39185014520898404e-02,
    -1.06480906856588099e-02,
    5.74402576043599525e-02,
    4.28402576043599576e-02,
    1.01363606596799796e-02,
    6.39185014520898404e-02,
    -1.06480906856588099e-02,
    4.28402576043599576e-02,
    4.28402576043599576e-02,
    1.01363606596799796e-02,
    1.44422318971990128e-02,
    -1.64491721608941641e-03,
    1.01363606596799796e-02,
    1.01363606596799796e-02,
    2.88466686500000015e-03,
];
const SEGMENTED_A_N: [f64; 5] = [
    -1.60213725994560879e-02,
    -1.09069158927739251e0,
    1.00677435730602925e-02,
    2.28973793573060191e-01,
    -5.71924049674868915e-02,
];
const SEGMENTED_B_M: [f64; 25] = [
    1.00000000009999979e0,
    0.00000000000000000e0,
    6.44194271136855623e-02,
    6.44194271136855623e-02,
    1.41306770636855719e-02,
    0.00000000000000000e0,
    1.00000000009999979e0,
    3.40701930462545058e-03,
    3.40701930462545058e-03,
    3.40701930462545058e-03,
    6.44194271136855623e-02,
    3.40701930462545058e-03,
    5.70675470786855613e-02,
    4.24675470786855594e-02,
    9.95000539684278394e-03,
    6.44194271136855623e-02,
    3.40701930462545058e-03,
    4.24675470786855594e-02,
    4.24675470786855594e-02,
    9.95000539684278394e-03,
    1.41306770636855719e-02,
    3.40701930462545058e-03,
    9.95000539684278394e-03,
    9.95000539684278394e-03,
    2.88466686499999972e-03,
];
const SEGMENTED_B_N: [f64; 5] = [
    1.66943945926646947e-03,
    -1.00742691936170559e0,
    -2.58933467151534116e-03,
    -1.03933467151522845e-03,
    -5.93240544011485668e-02,
];
const QUADRUPED_A_M: [f64; 49] = [
    1.00009999999999999e0,
    0.00000000000000000e0,
    6.46094742232919267e-02,
    2.01163237874009172e-02,
    3.80393222729260997e-03,
    2.02686976884258949e-02,
    3.73957036790485481e-03,
    0.00000000000000000e0,
    1.00009999999999999e0,
    -9.68443781392462795e-03,
    -5.20580074725879392e-03,
    1.59439480799602627e-03,
    -4.51497377303956750e-03,
    1.74000248766717296e-03,
    6.46094742232919267e-02,
    -9.68443781392462795e-03,
    9.25326689339633357e-01,
    2.03087623384940533e-02,
    2.07273025011101616e-03,
    1.11536903899945687e-02,
    5.16724512492169712e-03,
    2.01163237874009172e-02,
    -5.20580074725879392e-03,
    2.03087623384940533e-02,
    1.13542123760933950e-02,
    2.79629293204669907e-03,
    0.00000000000000000e0,
    0.00000000000000000e0,
    3.80393222729260997e-03,
    1.59439480799602627e-03,
    2.07273025011101616e-03,
    2.79629293204669907e-03,
    1.35107948800000026e-03,
    0.00000000000000000e0,
    0.00000000000000000e0,
    2.02686976884258949e-02,
    -4.51497377303956750e-03,
    1.11536903899945687e-02,
    0.00000000000000000e0,
    0.00000000000000000e0,
    1.13382816172507266e-02,
    2.78832755262536361e-03,
    3.73957036790485481e-03,
    1.74000248766717296e-03,
    5.16724512492169712e-03,
    0.00000000000000000e0,
    0.00000000000000000e0,
    2.78832755262536361e-03,
    1.35107948800000004e-03,
];
const QUADRUPED_A_N: [f64; 7] = [
    -4.05676710798282408e-02,
    -1.11665668223500858e0,
    9.38481222709636881e-02,
    7.20499396878843124e-02,
    -6.07616412207530390e-02,
    -3.25540189072525826e-02,
    -2.76707929702055509e-02,
];

fn check(model: &ModelSpec, q: &[f64], qd: &[f64], u: &[f64], m_ref: &[f64], n_ref: &[f64]) {
    let n = model.n_q;
    let m = mass_matrix(model, q).unwrap();
    for i in 0..n {
        for j in 0..n {
            let r = m_ref[i * n + j];
            assert!(
                (m[(i, j)] - r).abs() <= 1e-10 * (1.0 + r.abs()),
                "M[{i},{j}] = {} vs {r}",
                m[(i, j)]
            );
        }
    }
    let f = generalized_forces(model, q, qd, u).unwrap();
    for i in 0..n {
        let r = n_ref[i];
        assert!((f[i] - r).abs() <= 1e-10 * (1.0 + r.abs()), "n[{i}] = {} vs {r}", f[i]);
    }
}

#[test]
fn prismatic_general_state() {
    check(
        &prismatic_monopod(),
        &[0.1, 0.95, 0.05, 0.2, 0.97],
        &[0.3, -0.5, 0.1, -0.2, -0.6],
        &[0.1, -0.2],
        &PRISMATIC_A_M,
        &PRISMATIC_A_N,
    );
}

#[test]
fn prismatic_rest_pose() {
    check(
        &prismatic_monopod(),
        &[0.0, 1.0, 0.0, 0.0, 1.0],
        &[0.0; 5],
        &[0.0; 2],
        &PRISMATIC_REST_M,
        &PRISMATIC_REST_N,
    );
}

#[test]
fn segmented_reference_configuration() {
    let mut model = segmented_monopod();
    model.free_params[0].value = -0.1761;
    check(
        &model,
        &[0.0, 0.9, 0.0, -0.18, 0.53],
        &[0.4, -0.3, 0.2, -1.5, 2.0],
        &[0.05, -0.03],
        &SEGMENTED_A_M,
        &SEGMENTED_A_N,
    );
}

#[test]
fn segmented_second_state() {
    check(
        &segmented_monopod(),
        &[0.2, 0.85, 0.3, -0.3, 0.7],
        &[0.1, 0.2, -0.4, 0.5, -0.8],
        &[0.0, 0.0],
        &SEGMENTED_B_M,
        &SEGMENTED_B_N,
    );
}

#[test]
fn quadruped_bounding_state() {
    check(
        &sagittal_quadruped(),
        &[0.0, 1.1248, 0.0015, -0.3989, 0.7943, -0.3657, 0.7997],
        &[0.4112, -0.4870, 0.2990, -2.7939, 3.9662, 0.2260, -0.3944],
        &[0.02, -0.01, 0.03, 0.0],
        &QUADRUPED_A_M,
        &QUADRUPED_A_N,
    );
}
