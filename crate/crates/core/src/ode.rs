//! Dormand–Prince 8(5,3) integrator for small real systems.
//!
//! Step-size control follows Hairer's DOP853 (combined 5th/3rd order error
//! estimate, safety 0.9, step ratio clamped to [1/6, 3]). Steps are
//! shortened to land exactly on each requested output time, so no dense
//! output is needed.

use crate::error::{Error, Result};

const MAX_STEPS: usize = 20_000_000;

/// Integrate `y' = f(t, y)` from `(t0, y0)`, returning `y` at each of the
/// ascending times `t_out` (all `>= t0`).
///
/// `rtol` and `atol` are applied per component as in Hairer's code:
/// `sk = atol + rtol·max(|y_old|, |y_new|)`.
pub fn dop853<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_out: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|&t| t < t0) {
        return Err(Error::Precondition(
            "output times must be ascending and not before t0".into(),
        ));
    }
    let mut out = Vec::with_capacity(t_out.len());
    let mut t = t0;
    let mut y = y0;
    let Some(&t_end) = t_out.last() else {
        return Ok(out);
    };
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t, &y, &k1, t_end - t0, rtol, atol);
    let mut next = 0;
    while next < t_out.len() && t_out[next] <= t {
        out.push(y);
        next += 1;
    }
    let mut steps = 0;
    let mut rejected_last = false;
    while next < t_out.len() {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::StepBudget(format!(
                "more than {MAX_STEPS} steps before t = {}",
                t_out[next]
            )));
        }
        let target = t_out[next];
        let h_proposed = h;
        let mut hit = false;
        if t + 1.01 * h >= target {
            h = target - t;
            hit = true;
        }
        if h.abs() <= 10.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        let (y_new, err) = step(&mut f, t, &y, &k1, h, rtol, atol);
        let fac11 = err.powf(0.125);
        let fac = (fac11 / 0.9).clamp(1.0 / 3.0, 6.0);
        let mut h_new = h / fac;
        if err <= 1.0 {
            t = if hit { target } else { t + h };
            y = y_new;
            k1 = f(t, &y);
            if rejected_last {
                h_new = h_new.min(h);
            }
            rejected_last = false;
            while next < t_out.len() && t_out[next] <= t {
                out.push(y);
                next += 1;
            }
            // A step clipped to an output time says little about the
            // natural step size; keep the earlier proposal.
            if hit {
                h_new = h_new.max(h_proposed);
            }
        } else {
            h_new = h / (fac11 / 0.9).min(3.0);
            rejected_last = true;
        }
        h = h_new;
    }
    Ok(out)
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    span: f64,
    rtol: f64,
    atol: f64,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sk = atol + rtol * y[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(span);
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y[i] + h * f0[i];
    }
    let f1 = f(t + h, &y1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sk = atol + rtol * y[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        1e-6_f64.max(h * 1e-3)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    (100.0 * h).min(h1).min(span)
}

#[allow(clippy::too_many_arguments)]
fn step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
) -> ([f64; N], f64)
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let stage = |coef: &[(f64, &[f64; N])]| {
        let mut s = *y;
        for i in 0..N {
            let mut acc = 0.0;
            for (a, k) in coef {
                acc += a * k[i];
            }
            s[i] += h * acc;
        }
        s
    };
    let k2 = f(t + C2 * h, &stage(&[(A21, k1)]));
    let k3 = f(t + C3 * h, &stage(&[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &stage(&[(A41, k1), (A43, &k3)]));
    let k5 = f(t + C5 * h, &stage(&[(A51, k1), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + C6 * h, &stage(&[(A61, k1), (A64, &k4), (A65, &k5)]));
    let k7 = f(
        t + C7 * h,
        &stage(&[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)]),
    );
    let k8 = f(
        t + C8 * h,
        &stage(&[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]),
    );
    let k9 = f(
        t + C9 * h,
        &stage(&[
            (A91, k1),
            (A94, &k4),
            (A95, &k5),
            (A96, &k6),
            (A97, &k7),
            (A98, &k8),
        ]),
    );
    let k10 = f(
        t + C10 * h,
        &stage(&[
            (A101, k1),
            (A104, &k4),
            (A105, &k5),
            (A106, &k6),
            (A107, &k7),
            (A108, &k8),
            (A109, &k9),
        ]),
    );
    let k11 = f(
        t + C11 * h,
        &stage(&[
            (A111, k1),
            (A114, &k4),
            (A115, &k5),
            (A116, &k6),
            (A117, &k7),
            (A118, &k8),
            (A119, &k9),
            (A1110, &k10),
        ]),
    );
    let k12 = f(
        t + h,
        &stage(&[
            (A121, k1),
            (A124, &k4),
            (A125, &k5),
            (A126, &k6),
            (A127, &k7),
            (A128, &k8),
            (A129, &k9),
            (A1210, &k10),
            (A1211, &k11),
        ]),
    );

    let mut y_new = *y;
    let mut err3 = 0.0;
    let mut err5 = 0.0;
    for i in 0..N {
        let bsum = B1 * k1[i]
            + B6 * k6[i]
            + B7 * k7[i]
            + B8 * k8[i]
            + B9 * k9[i]
            + B10 * k10[i]
            + B11 * k11[i]
            + B12 * k12[i];
        y_new[i] = y[i] + h * bsum;
        let sk = atol + rtol * y[i].abs().max(y_new[i].abs());
        let e3 = bsum - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
        let e5 = ER1 * k1[i]
            + ER6 * k6[i]
            + ER7 * k7[i]
            + ER8 * k8[i]
            + ER9 * k9[i]
            + ER10 * k10[i]
            + ER11 * k11[i]
            + ER12 * k12[i];
        err3 += (e3 / sk).powi(2);
        err5 += (e5 / sk).powi(2);
    }
    let mut deno = err5 + 0.01 * err3;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err5 * (1.0 / (N as f64 * deno)).sqrt();
    (y_new, err)
}

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

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;
