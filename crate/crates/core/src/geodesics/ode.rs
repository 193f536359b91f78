//! Dormand–Prince 8(5,3) integrator that lands exactly on requested nodes.

use crate::error::{Error, Result};

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;
const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;
const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;
const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

/// Stage `i` (0-based, `1..=11`) is evaluated at `t + C[i] h` from
/// `y + h Σ a_{ij} k_j`.
const STAGES: [(f64, &[(usize, f64)]); 11] = [
    (C2, &[(0, A21)]),
    (C3, &[(0, A31), (1, A32)]),
    (C4, &[(0, A41), (2, A43)]),
    (C5, &[(0, A51), (2, A53), (3, A54)]),
    (C6, &[(0, A61), (3, A64), (4, A65)]),
    (C7, &[(0, A71), (3, A74), (4, A75), (5, A76)]),
    (C8, &[(0, A81), (3, A84), (4, A85), (5, A86), (6, A87)]),
    (C9, &[(0, A91), (3, A94), (4, A95), (5, A96), (6, A97), (7, A98)]),
    (C10, &[(0, A101), (3, A104), (4, A105), (5, A106), (6, A107), (7, A108), (8, A109)]),
    (
        C11,
        &[(0, A111), (3, A114), (4, A115), (5, A116), (6, A117), (7, A118), (8, A119), (9, A1110)],
    ),
    (
        1.0,
        &[(0, A121), (3, A124), (4, A125), (5, A126), (6, A127), (7, A128), (8, A129), (9, A1210), (10, A1211)],
    ),
];

const WEIGHTS: [(usize, f64); 8] = [(0, B1), (5, B6), (6, B7), (7, B8), (8, B9), (9, B10), (10, B11), (11, B12)];
const ERR5: [(usize, f64); 8] = [(0, ER1), (5, ER6), (6, ER7), (7, ER8), (8, ER9), (9, ER10), (10, ER11), (11, ER12)];
const ERR3: [(usize, f64); 3] = [(0, BHH1), (8, BHH2), (11, BHH3)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        StepControl {
            rtol: tol,
            atol: tol,
            max_steps: 200_000,
        }
    }
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const BETA: f64 = 0.04;

fn axpy_into(out: &mut [f64], y: &[f64], h: f64, k: &[Vec<f64>], coeffs: &[(usize, f64)]) {
    out.copy_from_slice(y);
    for &(j, a) in coeffs {
        let s = h * a;
        for (o, kj) in out.iter_mut().zip(&k[j]) {
            *o += s * kj;
        }
    }
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each of
/// `nodes`, which must be monotone in one direction starting from `t0`.
///
/// `f` signals that `y` left the domain by returning an error; the step is
/// then retried with a smaller size and, if that keeps failing, the exit time
/// is reported.
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], nodes: &[f64], control: StepControl) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let last = match nodes.last() {
        Some(&t) => t,
        None => return Ok(Vec::new()),
    };
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    if nodes.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) || (nodes[0] - t0) * dir < 0.0 {
        return Err(Error::InvalidArgument("integration nodes must be monotone".into()));
    }
    let span = (last - t0).abs();

    let mut out = Vec::with_capacity(nodes.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 12];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut k_new = vec![0.0; n];
    f(t, &y, &mut k[0]).map_err(|_| Error::DomainExit { t })?;

    let mut h = initial_step(&mut f, t, &y, &k[0], dir, control)?.min(span.max(f64::MIN_POSITIVE));
    let mut fac_old = 1e-4f64;
    let mut steps = 0usize;
    let mut last_rejected = false;

    for &node in nodes {
        while (node - t) * dir > 0.0 {
            steps += 1;
            if steps > control.max_steps {
                return Err(Error::StepCollapse { t, h });
            }
            let remaining = (node - t).abs();
            let hs = h.min(remaining);
            let hh = hs * dir;
            if hs <= 1e-14 * (1.0 + t.abs()) && hs < remaining {
                return Err(Error::StepCollapse { t, h: hs });
            }

            let mut failed = false;
            for (i, (c, coeffs)) in STAGES.iter().enumerate() {
                axpy_into(&mut stage, &y, hh, &k, coeffs);
                if f(t + c * hh, &stage, &mut k[i + 1]).is_err() {
                    failed = true;
                    break;
                }
            }
            if failed {
                if hs <= 1e-12 * span.max(1.0) {
                    return Err(Error::DomainExit { t });
                }
                h = hs * 0.25;
                last_rejected = true;
                continue;
            }

            axpy_into(&mut y_new, &y, hh, &k, &WEIGHTS);
            let mut err5 = 0.0;
            let mut err3 = 0.0;
            for i in 0..n {
                let sk = control.atol + control.rtol * y[i].abs().max(y_new[i].abs());
                let inc: f64 = WEIGHTS.iter().map(|&(j, b)| b * k[j][i]).sum();
                let e3 = inc - ERR3.iter().map(|&(j, b)| b * k[j][i]).sum::<f64>();
                let e5: f64 = ERR5.iter().map(|&(j, b)| b * k[j][i]).sum();
                err3 += (e3 / sk).powi(2);
                err5 += (e5 / sk).powi(2);
            }
            let mut deno = err5 + 0.01 * err3;
            if deno <= 0.0 {
                deno = 1.0;
            }
            let err = hs * err5 * (1.0 / (deno * n as f64)).sqrt();

            let fac11 = err.powf(1.0 / 8.0 - BETA * 0.2);
            let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            if err <= 1.0 {
                if f(t + hh, &y_new, &mut k_new).is_err() {
                    h = hs * 0.25;
                    last_rejected = true;
                    continue;
                }
                fac_old = err.max(1e-4);
                t = if hs == remaining { node } else { t + hh };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k[0], &mut k_new);
                let mut h_new = hs / fac;
                if last_rejected {
                    h_new = h_new.min(hs);
                }
                last_rejected = false;
                // Keep the controller's proposal when the step was clipped by a node.
                h = if hs < h { h.max(h_new) } else { h_new };
            } else {
                h = hs / (1.0 / FAC_MIN).min(fac11 / SAFE);
                last_rejected = true;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step<F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], dir: f64, control: StepControl) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let sk: Vec<f64> = y.iter().map(|v| control.atol + control.rtol * v.abs()).collect();
    let dnf: f64 = f0.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum();
    let dny: f64 = y.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum();
    let h0 = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    let probe: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    if f(t + dir * h0, &probe, &mut f1).is_err() {
        return Ok(h0);
    }
    let der2 = f1
        .iter()
        .zip(f0)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        .sqrt()
        / h0;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    Ok((100.0 * h0).min(h1))
}
