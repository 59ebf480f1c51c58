//! Acceptance criteria. Runs as a plain binary and prints one PASS/FAIL line
//! per criterion; exits nonzero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use membrane::experiments::{
    convergence_study, epsilon_fourier_limit_study, shape_param_sweep, timing_bench, ErrorReport, Model, Quantity,
    StudyConfig,
};
use membrane::fourier::{sph_fit, trig_fit, SphInterpolant};
use membrane::mechanics::{fiber_force_2d, surface_tension_force, MaterialParams};
use membrane::points::{equispaced_circle, fibonacci_sphere, NodeSet3D, PointCache, SpherePoint};
use membrane::pwl::{spring_force_2d, spring_force_3d, triangulate_sphere_like, ClosedPolyline};
use membrane::rbf::{rbf_fit_2d, rbf_fit_3d, RadialKernel};
use membrane::shapes::{
    IdealShape2D, IdealShape3D, Jet2D, Jet3D, NamedObject, Partial, Preset, Profile, TestObject2D,
    TestObject3D,
};
use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("me-cache")
}

fn me(n: usize) -> NodeSet3D {
    PointCache::new(cache_dir()).minimal_energy(n, 0).expect("minimal energy set")
}

fn study(object: impl Into<NamedObject>, model: Model) -> StudyConfig {
    let mut cfg = StudyConfig::new(object, model);
    cfg.cache_dir = cache_dir();
    cfg
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// ---------------------------------------------------------------------------
// 1. Exactness

fn ellipse(xc: f64, yc: f64, a: f64, b: f64) -> TestObject2D {
    TestObject2D::new(IdealShape2D::new(xc, yc, a, b).unwrap(), 0.0, 1.0, Profile::Smooth).unwrap()
}

fn sphere_object(r: f64) -> TestObject3D {
    TestObject3D::new(IdealShape3D::new([0.0; 3], r, r, r).unwrap(), 0.0, 1.0, 0.0, 0.0, Profile::Smooth).unwrap()
}

fn data_3d(obj: &TestObject3D, nodes: &NodeSet3D) -> [Vec<f64>; 3] {
    let v: Vec<Vector3<f64>> = nodes.points().iter().map(|p| obj.eval(p.lambda, p.theta)).collect();
    [0, 1, 2].map(|i| v.iter().map(|p| p[i]).collect())
}

fn random_site(rng: &mut ChaCha8Rng) -> SpherePoint {
    let z: f64 = rng.gen_range(-1.0..1.0);
    SpherePoint::new(rng.gen_range(-PI..PI), z.asin())
}

fn exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let obj = ellipse(0.9, 0.9, 0.04, 0.05);
    let mut trig = 0.0f64;
    for n in (4..=56).step_by(2) {
        let nodes = equispaced_circle(n).unwrap();
        let (x, y): (Vec<f64>, Vec<f64>) = nodes.angles().iter().map(|&l| obj.eval(l)).map(|p| (p.x, p.y)).unzip();
        let p = trig_fit(&nodes, &x, &y).unwrap();
        for _ in 0..200 {
            let l = rng.gen_range(-PI..PI);
            trig = trig.max((p.eval(l, 0).unwrap() - obj.eval(l)).norm());
        }
    }
    ensure(trig <= 1e-12, format!("trig ellipse error {trig:e}"))?;

    let sphere = sphere_object(1.3);
    let mut sh = 0.0f64;
    for degree in 1..=6 {
        let nodes = me((degree + 1) * (degree + 1));
        let [x, y, z] = data_3d(&sphere, &nodes);
        let p = sph_fit(&nodes, &x, &y, &z, degree).map_err(|e| format!("degree {degree}: {e}"))?;
        for _ in 0..200 {
            let s = random_site(&mut rng);
            sh = sh.max((p.eval(s.lambda, s.theta, Partial::Val) - sphere.eval(s.lambda, s.theta)).norm());
        }
    }
    ensure(sh <= 1e-10, format!("harmonic sphere error {sh:e}"))?;

    let mut rbf = 0.0f64;
    for preset in [Preset::Object1_2D, Preset::Object2_2D] {
        let cfg = study(preset, Model::Rbf);
        let obj = *cfg.object.curve().unwrap();
        for n in (8..=56).step_by(8) {
            let nodes = equispaced_circle(n).unwrap();
            let (x, y): (Vec<f64>, Vec<f64>) =
                nodes.angles().iter().map(|&l| obj.eval(l)).map(|p| (p.x, p.y)).unzip();
            let s = rbf_fit_2d(&nodes, &x, &y, cfg.kernel()).map_err(|e| format!("{preset:?} N={n}: {e}"))?;
            for (k, &l) in nodes.angles().iter().enumerate() {
                rbf = rbf.max((s.eval(l, 0).unwrap() - Vector2::new(x[k], y[k])).norm());
            }
        }
    }
    for preset in [Preset::Object1_3D, Preset::Object2_3D] {
        let cfg = study(preset, Model::Rbf);
        let obj = *cfg.object.surface().unwrap();
        for n in [64, 256] {
            let nodes = me(n);
            let [x, y, z] = data_3d(&obj, &nodes);
            let s = rbf_fit_3d(&nodes, &x, &y, &z, cfg.kernel()).map_err(|e| format!("{preset:?} N={n}: {e}"))?;
            for (k, q) in nodes.points().iter().enumerate() {
                rbf = rbf.max((s.eval(*q, Partial::Val) - Vector3::new(x[k], y[k], z[k])).norm());
            }
        }
    }
    ensure(rbf <= 1e-8, format!("rbf node residual {rbf:e}"))?;
    Ok(format!("trig {trig:.1e}, harmonics {sh:.1e}, rbf residual {rbf:.1e}"))
}

// ---------------------------------------------------------------------------
// 2. Mechanics oracles

fn circle_jet(r: f64, l: f64) -> Jet2D {
    let (s, c) = l.sin_cos();
    Jet2D {
        x: Vector2::new(r * c, r * s),
        d1: Vector2::new(-r * s, r * c),
        d2: Vector2::new(-r * c, -r * s),
    }
}

fn sphere_jet(r: f64, l: f64, t: f64) -> Jet3D {
    let (sl, cl) = l.sin_cos();
    let (st, ct) = t.sin_cos();
    Jet3D {
        x: Vector3::new(ct * cl, ct * sl, st) * r,
        d_lambda: Vector3::new(-ct * sl, ct * cl, 0.0) * r,
        d_theta: Vector3::new(-st * cl, -st * sl, ct) * r,
        d_ll: Vector3::new(-ct * cl, -ct * sl, 0.0) * r,
        d_lt: Vector3::new(st * sl, -st * cl, 0.0) * r,
        d_tt: Vector3::new(-ct * cl, -ct * sl, -st) * r,
    }
}

fn sh_jet(p: &SphInterpolant, l: f64, t: f64) -> Jet3D {
    Jet3D::from_partials(Partial::ALL.map(|q| p.eval(l, t, q)))
}

fn mechanics_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut fiber = 0.0f64;
    let mut tension = 0.0f64;
    for _ in 0..500 {
        let r: f64 = rng.gen_range(0.1..3.0);
        let params = MaterialParams::new(rng.gen_range(0.05..2.0), rng.gen_range(0.05..2.0)).unwrap();
        let l = rng.gen_range(-PI..PI);
        let f = fiber_force_2d(&circle_jet(r, l), &params);
        fiber = fiber.max((f.norm() - params.k0 * r).abs());
        let s = random_site(&mut rng);
        let t = s.theta.clamp(-1.5, 1.5);
        let jet = sphere_jet(r, s.lambda, t);
        let f = surface_tension_force(&jet, &params).map_err(|e| e.to_string())?;
        let want = -jet.x.normalize() * (2.0 * params.gamma / r);
        tension = tension.max((f - want).norm());
    }

    // The same checks through fitted models of a circle and a sphere.
    let params = MaterialParams::default();
    let r = 0.7;
    let nodes = equispaced_circle(16).unwrap();
    let (x, y): (Vec<f64>, Vec<f64>) = nodes.angles().iter().map(|&l| (r * l.cos(), r * l.sin())).unzip();
    let p = trig_fit(&nodes, &x, &y).unwrap();
    let sphere_nodes = me(16);
    let [sx, sy, sz] = data_3d(&sphere_object(r), &sphere_nodes);
    let sp = sph_fit(&sphere_nodes, &sx, &sy, &sz, 3).unwrap();
    for _ in 0..500 {
        let l = rng.gen_range(-PI..PI);
        let jet = Jet2D {
            x: p.eval(l, 0).unwrap(),
            d1: p.eval(l, 1).unwrap(),
            d2: p.eval(l, 2).unwrap(),
        };
        fiber = fiber.max((fiber_force_2d(&jet, &params).norm() - params.k0 * r).abs());
        let s = random_site(&mut rng);
        let t = s.theta.clamp(-1.5, 1.5);
        let jet = sh_jet(&sp, s.lambda, t);
        let f = surface_tension_force(&jet, &params).map_err(|e| e.to_string())?;
        tension = tension.max((f + jet.x.normalize() * (2.0 * params.gamma / r)).norm());
    }
    ensure(fiber <= 1e-12, format!("fiber force deviation {fiber:e}"))?;
    ensure(tension <= 1e-10, format!("surface tension deviation {tension:e}"))?;

    // Spring sums: exactly zero whenever every term is exactly representable,
    // and zero to rounding otherwise.
    let mut exact = true;
    let mut rounding = 0.0f64;
    for trial in 0..200 {
        let n = rng.gen_range(3..200);
        let pts: Vec<Vector2<f64>> = (0..n)
            .map(|_| Vector2::new(rng.gen_range(-1000..1000) as f64, rng.gen_range(-1000..1000) as f64))
            .collect();
        if let Ok(c) = ClosedPolyline::new(pts) {
            exact &= spring_force_2d(&c, 0.5).iter().sum::<Vector2<f64>>() == Vector2::zeros();
        }
        let m = 4 + trial;
        let unit = fibonacci_sphere(m).unwrap().unit_vectors();
        let mesh = triangulate_sphere_like(&unit).unwrap();
        let ints = unit.iter().map(|v| (v * 4096.0).map(f64::round)).collect();
        exact &= spring_force_3d(&mesh.with_vertices(ints).unwrap(), 0.25).iter().sum::<Vector3<f64>>()
            == Vector3::zeros();

        let obj = TestObject2D::object2();
        let c = ClosedPolyline::new((0..n.max(4)).map(|i| obj.eval(TAU * i as f64 / n.max(4) as f64)).collect())
            .unwrap();
        let forces = spring_force_2d(&c, 0.2);
        let scale: f64 = c.points().iter().map(|p| p.norm()).sum::<f64>() * 0.8;
        rounding = rounding.max(forces.iter().sum::<Vector2<f64>>().norm() / (f64::EPSILON * scale));
        let f3 = spring_force_3d(&mesh, 0.2);
        let scale3: f64 = mesh.adjacency().iter().map(|a| a.len() as f64).sum::<f64>() * 0.8;
        rounding = rounding.max(f3.iter().sum::<Vector3<f64>>().norm() / (f64::EPSILON * scale3));
    }
    ensure(exact, "spring forces on exactly representable data do not cancel exactly")?;
    ensure(rounding <= 8.0, format!("spring sum {rounding:.1} ulps of the summed magnitude"))?;
    Ok(format!(
        "fiber {fiber:.1e}, tension {tension:.1e}, spring sums exact (rounding {rounding:.2} eps)"
    ))
}

// ---------------------------------------------------------------------------
// 3. Derivative consistency

/// Two Richardson levels on the central difference of `f` at `x`.
fn richardson_slope(f: impl Fn(f64) -> Vec<f64>, x: f64, h: f64) -> Vec<f64> {
    let d = |h: f64| -> Vec<f64> { f(x + h).iter().zip(f(x - h)).map(|(a, b)| (a - b) / (2.0 * h)).collect() };
    let (d1, d2, d4) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1: Vec<f64> = d2.iter().zip(&d1).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
    let r2: Vec<f64> = d4.iter().zip(&d2).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
    r2.iter().zip(&r1).map(|(a, b)| (16.0 * a - b) / 15.0).collect()
}

fn rel_dev(a: &[f64], fd: &[f64], floor: f64) -> f64 {
    let diff: f64 = a.iter().zip(fd).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = fd.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(floor)
}

fn v(x: Vector3<f64>) -> Vec<f64> {
    vec![x.x, x.y, x.z]
}

/// Per partial: the lower partial it is the derivative of, and the direction.
const CHAIN: [(Partial, Partial, bool); 5] = [
    (Partial::DLambda, Partial::Val, true),
    (Partial::DTheta, Partial::Val, false),
    (Partial::DLambdaLambda, Partial::DLambda, true),
    (Partial::DLambdaTheta, Partial::DLambda, false),
    (Partial::DThetaTheta, Partial::DTheta, false),
];

fn surface_worst(rng: &mut ChaCha8Rng, eval: &dyn Fn(f64, f64, Partial) -> Vector3<f64>, k: f64, worst: &mut [f64; 5]) {
    let l = rng.gen_range(-PI..PI);
    let t = rng.gen_range(-1.3..1.3);
    let h = 0.05 / k;
    for (i, &(partial, lower, along_lambda)) in CHAIN.iter().enumerate() {
        let fd = if along_lambda {
            richardson_slope(|x| v(eval(x, t, lower)), l, h)
        } else {
            richardson_slope(|x| v(eval(l, x, lower)), t, h)
        };
        let order = if lower == Partial::Val { 1 } else { 2 };
        worst[i] = worst[i].max(rel_dev(&v(eval(l, t, partial)), &fd, 1e-3 * k.powi(order)));
    }
}

fn derivative_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut curve_worst = [[0.0f64; 2]; 2];
    for model in 0..2 {
        for _ in 0..50 {
            let n = 2 * rng.gen_range(4..=28);
            let nodes = equispaced_circle(n).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let eval: Box<dyn Fn(f64, usize) -> Vec<f64>> = if model == 0 {
                let p = trig_fit(&nodes, &x, &y).unwrap();
                Box::new(move |l, o| {
                    let v = p.eval(l, o).unwrap();
                    vec![v.x, v.y]
                })
            } else {
                // Random data on an ill-conditioned system leaves evaluation
                // noise of order cond * eps that no difference quotient can
                // resolve, so the shape parameter is redrawn until the
                // system is reasonably conditioned.
                let s = loop {
                    let kernel = RadialKernel::mq(rng.gen_range(1.0..6.0)).unwrap();
                    let s = rbf_fit_2d(&nodes, &x, &y, kernel).unwrap();
                    if s.condition <= 1e6 {
                        break s;
                    }
                };
                Box::new(move |l, o| {
                    let v = s.eval(l, o).unwrap();
                    vec![v.x, v.y]
                })
            };
            let k = n as f64 / 2.0;
            let l = rng.gen_range(-PI..PI);
            for order in 1..=2 {
                let fd = richardson_slope(|x| eval(x, order - 1), l, 0.05 / k);
                let dev = rel_dev(&eval(l, order), &fd, 1e-3 * k.powi(order as i32));
                curve_worst[model][order - 1] = curve_worst[model][order - 1].max(dev);
            }
        }
    }

    let mut sh_worst = [0.0f64; 5];
    let mut rbf_worst = [0.0f64; 5];
    for _ in 0..50 {
        let degree = rng.gen_range(2..=6);
        let nodes = me((degree + 1) * (degree + 1));
        let d: [Vec<f64>; 3] = std::array::from_fn(|_| (0..nodes.len()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let p = sph_fit(&nodes, &d[0], &d[1], &d[2], degree).map_err(|e| e.to_string())?;
        surface_worst(&mut rng, &|l, t, q| p.eval(l, t, q), degree as f64, &mut sh_worst);

        let n = [16, 36, 64, 121][rng.gen_range(0..4)];
        let nodes = me(n);
        let d: [Vec<f64>; 3] = std::array::from_fn(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let eps = rng.gen_range(1.0..4.0);
        let kernel = if rng.gen_bool(0.5) { RadialKernel::imq(eps) } else { RadialKernel::mq(eps) }.unwrap();
        let s = rbf_fit_3d(&nodes, &d[0], &d[1], &d[2], kernel).map_err(|e| e.to_string())?;
        surface_worst(&mut rng, &|l, t, q| s.eval(SpherePoint::new(l, t), q), (n as f64).sqrt(), &mut rbf_worst);
    }
    let worst = curve_worst
        .iter()
        .flatten()
        .chain(&sh_worst)
        .chain(&rbf_worst)
        .copied()
        .fold(0.0, f64::max);
    let summary = format!(
        "worst relative deviation {worst:.1e} (trig {:.1e}, rbf2d {:.1e}, harmonics {:.1e}, rbf3d {:.1e})",
        curve_worst[0][0].max(curve_worst[0][1]),
        curve_worst[1][0].max(curve_worst[1][1]),
        sh_worst.iter().copied().fold(0.0, f64::max),
        rbf_worst.iter().copied().fold(0.0, f64::max),
    );
    ensure(worst <= 1e-5, summary.clone())?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// 4-6. Convergence shapes

fn run_study(object: Preset, model: Model, n_list: &[usize], m: usize) -> ErrorReport {
    let mut cfg = study(object, model);
    cfg.n_list = n_list.to_vec();
    cfg.m = m;
    convergence_study(&cfg).expect("study runs")
}

fn err(r: &ErrorReport, model: Model, n: usize, q: Quantity) -> Result<f64, String> {
    r.error(model, n, q).ok_or_else(|| format!("{model} N={n} {} row failed", q.name()))
}

fn convergence_shape() -> Check {
    let ns: Vec<usize> = (8..=56).step_by(8).collect();
    let mut drops = Vec::new();
    for model in [Model::Fourier, Model::Rbf] {
        let r = run_study(Preset::Object1_2D, model, &[16, 56], 100);
        let drop = err(&r, model, 16, Quantity::Shape)? / err(&r, model, 56, Quantity::Shape)?;
        ensure(drop >= 1e3, format!("{model} shape error drops only {drop:.1e}x from N=16 to 56"))?;
        drops.push(drop);
    }
    let fourier = run_study(Preset::Object2_2D, Model::Fourier, &ns, 100);
    let rbf = run_study(Preset::Object2_2D, Model::Rbf, &ns, 100);
    for &n in ns.iter().filter(|&&n| n >= 24) {
        let (f, r) = (err(&fourier, Model::Fourier, n, Quantity::Shape)?, err(&rbf, Model::Rbf, n, Quantity::Shape)?);
        ensure(r <= f, format!("object 2 N={n}: rbf {r:e} > fourier {f:e}"))?;
    }
    Ok(format!(
        "object 1 drops {:.1e}x (fourier) {:.1e}x (rbf); object 2 rbf <= fourier for N >= 24",
        drops[0], drops[1]
    ))
}

fn normal_crossover() -> Check {
    let ns: Vec<usize> = (8..=56).step_by(2).collect();
    let pwl = run_study(Preset::Object1_2D, Model::Pwl, &[100], 100);
    let reference = err(&pwl, Model::Pwl, 100, Quantity::Normal)?;
    let fourier = run_study(Preset::Object1_2D, Model::Fourier, &ns, 100);
    let rbf = run_study(Preset::Object1_2D, Model::Rbf, &ns, 100);
    let first_below = |r: &ErrorReport, model| ns.iter().copied().find(|&n| err(r, model, n, Quantity::Normal).is_ok_and(|e| e < reference));
    let (f, r) = (first_below(&fourier, Model::Fourier), first_below(&rbf, Model::Rbf));
    let summary = format!("PWL reference {reference:.4e}; first N below it: fourier {f:?}, rbf {r:?}");
    ensure(f.is_some_and(|n| n <= 26) && r.is_some_and(|n| n <= 26), summary.clone())?;
    Ok(summary)
}

fn surfaces() -> Check {
    let ns = [64, 121, 256];
    let mut notes = Vec::new();
    for object in [Preset::Object1_3D, Preset::Object2_3D] {
        let pwl = run_study(object, Model::Pwl, &ns, 1024);
        let reference = err(&pwl, Model::Pwl, 1024, Quantity::Normal)?;
        let sh = run_study(object, Model::Fourier, &ns, 1024);
        let rbf = run_study(object, Model::Rbf, &ns, 1024);
        let e_sh = err(&sh, Model::Fourier, 256, Quantity::Normal)?;
        let e_rbf = err(&rbf, Model::Rbf, 256, Quantity::Normal)?;
        let name = object.name();
        ensure(e_sh < reference && e_rbf < reference, format!("{name}: sh {e_sh:e}, rbf {e_rbf:e}, pwl {reference:e}"))?;
        if object == Preset::Object2_3D {
            for q in [Quantity::Shape, Quantity::Normal] {
                let (a, b) = (err(&rbf, Model::Rbf, 256, q)?, err(&sh, Model::Fourier, 256, q)?);
                ensure(a < b, format!("{name} {}: rbf {a:e} >= sh {b:e}", q.name()))?;
            }
        }
        notes.push(format!("{name} normals sh {e_sh:.1e} rbf {e_rbf:.1e} pwl {reference:.1e}"));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// 7-8. Shape parameter

fn epsilon_limit() -> Check {
    let eps = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let gaps = epsilon_fourier_limit_study(8, &TestObject2D::object1(), &eps).map_err(|e| e.to_string())?;
    let g: Vec<f64> = gaps.iter().map(|e| e.gap.unwrap_or(f64::NAN)).collect();
    let summary = format!("gaps {}", g.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" "));
    ensure(g.windows(2).all(|w| w[1] < w[0]) && g[4] <= 1e-4, summary.clone())?;
    Ok(summary)
}

/// `(smallest stable ε, best ε)` of a sweep.
fn sweep_extremes(object: Preset, n: usize, grid: &[f64]) -> (f64, f64, f64) {
    let mut cfg = study(object, Model::Rbf);
    cfg.n_list = vec![n];
    let rows = shape_param_sweep(&cfg, grid).expect("sweep runs");
    let stable: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.max_error.map(|e| (r.epsilon, e))).collect();
    let best = stable.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("some stable fit");
    (stable[0].0, best.0, stable[stable.len() - 1].0)
}

fn sweep_shape() -> Check {
    let grid: Vec<f64> = (1..=80).map(|k| k as f64 / 10.0).collect();
    let mut notes = Vec::new();
    for n in [24, 56] {
        let (lo1, best1, _) = sweep_extremes(Preset::Object1_2D, n, &grid);
        let (lo2, best2, hi2) = sweep_extremes(Preset::Object2_2D, n, &grid);
        let note = format!(
            "N={n}: object 1 best {best1} (stable from {lo1}), object 2 best {best2} (stable {lo2}..{hi2})"
        );
        // Two grid steps of slack define the small-ε boundary.
        ensure(best1 - lo1 <= 0.2 + 1e-9, note.clone())?;
        ensure(best2 > lo2 && best2 < hi2 && best2 > best1, note.clone())?;
        notes.push(note);
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// 9. Timing

fn timing_direction() -> Check {
    const REPS: usize = 5;
    const TRIALS: usize = 100;
    let mut sums = [0.0f64; 3];
    for _ in 0..REPS {
        for (i, model) in Model::ALL.into_iter().enumerate() {
            let mut cfg = study(Preset::Object1_2D, model);
            cfg.n_list = vec![56];
            cfg.m = 100;
            sums[i] += timing_bench(&cfg, TRIALS).map_err(|e| e.to_string())?.rows[0].mean_s;
        }
    }
    let [pwl, fourier, rbf] = sums.map(|s| s / REPS as f64);
    let summary = format!(
        "mean per step: pwl {:.2}us, fourier {:.2}us ({:.1}x faster), rbf {:.2}us ({:.1}x faster); order-of-magnitude speedup: {}",
        pwl * 1e6,
        fourier * 1e6,
        pwl / fourier,
        rbf * 1e6,
        pwl / rbf,
        if pwl / fourier.max(rbf) >= 10.0 { "yes" } else { "no" },
    );
    ensure(fourier <= pwl && rbf <= pwl, summary.clone())?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// 10. Determinism

fn run_cli(out: &Path, args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_membrane"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("MEMBRANE_CACHE_DIR", cache_dir())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr).trim()))
}

fn determinism() -> Check {
    let presets = [
        ("study", "fig-geom2d"),
        ("study", "fig-normals2d"),
        ("study", "fig-force2d"),
        ("study", "fig-geom3d"),
        ("study", "fig-normals3d"),
        ("study", "fig-force3d"),
        ("sweep", "fig-2dshape1"),
        ("sweep", "fig-2dshape2"),
        ("sweep", "fig-3dshape1"),
        ("sweep", "fig-3dshape2"),
    ];
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (cmd, preset) in presets {
        run_cli(a.path(), &["--seed", "7", cmd, "--preset", preset])?;
        run_cli(b.path(), &["--seed", "7", cmd, "--preset", preset])?;
        let file = format!("{preset}.csv");
        let (x, y) = (fs::read(a.path().join(&file)).unwrap(), fs::read(b.path().join(&file)).unwrap());
        ensure(x == y, format!("{preset} differs between runs"))?;
    }
    Ok(format!("{} presets byte-identical across reruns", presets.len()))
}

// ---------------------------------------------------------------------------

fn main() {
    // Listing mode used by test runners.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let setup = Instant::now();
    for n in [4, 9, 16, 25, 36, 49, 64, 121, 256, 1024] {
        me(n);
    }
    println!("setup: minimal energy sets ready in {:.1}s", setup.elapsed().as_secs_f64());

    let criteria: [(&str, fn() -> Check, Duration); 10] = [
        ("1 exactness", exactness, Duration::from_secs(5)),
        ("2 mechanics oracles", mechanics_oracles, Duration::from_secs(5)),
        ("3 derivative consistency", derivative_consistency, Duration::from_secs(60)),
        ("4 convergence shape", convergence_shape, Duration::from_secs(60)),
        ("5 normal crossover", normal_crossover, Duration::from_secs(60)),
        ("6 surfaces", surfaces, Duration::from_secs(600)),
        ("7 epsilon limit", epsilon_limit, Duration::from_secs(5)),
        ("8 shape parameter sweep", sweep_shape, Duration::from_secs(60)),
        ("9 timing direction", timing_direction, Duration::from_secs(120)),
        ("10 determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let t = Instant::now();
        let outcome = check();
        let took = t.elapsed();
        let (verdict, detail) = match outcome {
            Ok(d) if took <= limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {}s limit", limit.as_secs())),
            Err(d) => ("FAIL", d),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("{verdict} criterion {name} [{:.2}s]: {detail}", took.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
