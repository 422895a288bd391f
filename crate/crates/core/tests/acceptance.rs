//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kframe::bundle::{
    check_constant_dimension, example_congruence, example_degenerate, trivial_so2_bundle, FamilySection, GeneralizedBundle, ObserverSection,
};
use kframe::connection::{
    check_covariance, check_galilean, decompose_connection, galilean_candidates, invariance_report, levi_civita, Christoffel, ConnectionForm,
    DensityKind, DensitySpec, Representation,
};
use kframe::gauge::{
    gauge_transform, naturally_indistinguishable, random_gauge_map, random_gauge_values, same_orbit, Indistinguishable, OrbitResult,
    ParticleField,
};
use kframe::io::{parse, read_json, GaugeSampleDoc};
use kframe::linalg::{expm, MatN};
use kframe::manifold::{Atlas, Chart, LatticeMap};
use kframe::matgroups::{
    classify, in_group, satisfies_symmetry, speed_of_interactions, ClassifyResult, GroupSpec, KValue, Speed,
};
use kframe::structures::{preserves, stabilizer_matches_group, structure_from_k, PointStructure};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ks() -> Vec<KValue> {
    vec![KValue::Finite(-4.0), KValue::Finite(-1.0), KValue::Finite(0.0), KValue::Omega, KValue::Finite(1.0), KValue::Finite(2.0)]
}

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn rot(t: f64) -> MatN {
    MatN::from_row_slice(2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

fn j() -> MatN {
    MatN::from_row_slice(2, &[0.0, -1.0, 1.0, 0.0])
}

fn group_suite() -> Check {
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    for k in ks() {
        let spec = GroupSpec::ok(k);
        for i in 0..200u64 {
            let a = spec.random_element(2 * i, 0.6);
            let b = spec.random_element(2 * i + 1, 0.6);
            let ab = &a * &b;
            let ai = a.inverse().map_err(|e| e.to_string())?;
            for (what, m) in [("a", &a), ("ab", &ab), ("a^-1", &ai)] {
                ensure(in_group(m, k, tol, false).map_err(|e| e.to_string())?, || format!("k={k}: {what} left the group at pair {i}"))?;
                ensure(satisfies_symmetry(m, tol).map_err(|e| e.to_string())?, || format!("k={k}: {what} breaks the symmetry condition"))?;
                worst = worst.max(kframe::matgroups::symmetry_deviation(m).map_err(|e| e.to_string())?);
            }
        }
        let d = spec.algebra_dimension();
        ensure(d == 6, || format!("k={k}: algebra dimension {d}"))?;
    }
    let d = GroupSpec::spatial_rotations().algebra_dimension();
    ensure(d == 3, || format!("rotation algebra dimension {d}"))?;
    Ok(format!("6 k values x 200 pairs, max symmetry deviation {worst:.1e}, dims 6/3"))
}

fn classification_suite() -> Check {
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    for (idx, k) in ks().into_iter().enumerate() {
        let spec = GroupSpec::ok(k);
        for trial in 0..10u64 {
            let mut set: Vec<MatN> = (0..4).map(|i| spec.random_element(1000 * idx as u64 + 10 * trial + i, 0.5)).collect();
            set.push(GroupSpec::spatial_rotations().random_element(trial, 1.0));
            match classify(&set, tol) {
                ClassifyResult::Unique { k: got } => {
                    match (k, got) {
                        (KValue::Omega, KValue::Omega) => {}
                        (KValue::Finite(a), KValue::Finite(b)) => worst = worst.max((a - b).abs()),
                        _ => return Err(format!("k={k}: classified as {got}")),
                    }
                }
                other => return Err(format!("k={k}: {other:?}")),
            }
        }
    }
    ensure(worst <= 1e-6, || format!("k error {worst:e}"))?;

    let rotations = GroupSpec::spatial_rotations();
    for seed in 0..20 {
        let set: Vec<MatN> = (0..3).map(|i| rotations.random_element(10 * seed + i, 2.0)).collect();
        ensure(classify(&set, tol) == ClassifyResult::Arbitrary, || format!("rotation set {seed} not arbitrary"))?;
    }
    let all = ks();
    for (i, &k1) in all.iter().enumerate() {
        for &k2 in &all[i + 1..] {
            let set = vec![GroupSpec::ok(k1).random_element(7, 0.5), GroupSpec::ok(k2).random_element(8, 0.5)];
            ensure(matches!(classify(&set, tol), ClassifyResult::Inconsistent { .. }), || format!("mixture {k1}/{k2} not inconsistent"))?;
        }
    }
    let (dual, gal) = (GroupSpec::ok(KValue::Finite(0.0)), GroupSpec::ok(KValue::Omega));
    for s in 0..100 {
        let a = dual.random_element(s, 0.8);
        let b = gal.random_element(s, 0.8);
        let ok = |m: &MatN, k| in_group(m, k, tol, false).unwrap_or(false);
        ensure(ok(&a.transpose(), KValue::Omega) && !ok(&a.transpose(), KValue::Finite(0.0)), || format!("dual sample {s}"))?;
        ensure(ok(&b.transpose(), KValue::Finite(0.0)) && !ok(&b.transpose(), KValue::Omega), || format!("Galilei sample {s}"))?;
    }
    Ok(format!("max |k-k_hat| {worst:.1e}; rotations arbitrary; 15 mixtures inconsistent; 100 duality samples"))
}

fn structure_suite() -> Check {
    let tol = 1e-9;
    for (idx, k) in ks().into_iter().enumerate() {
        let s = structure_from_k(k);
        let spec = GroupSpec::ok(k);
        let mut rng = ChaCha8Rng::seed_from_u64(idx as u64);
        let mut members = 0;
        for i in 0..200 {
            let mut a = spec.random_element(rng.gen(), 0.7);
            if i % 2 == 1 {
                let (r, c) = (rng.gen_range(0..4), rng.gen_range(0..4));
                a.set(r, c, a.get(r, c) + rng.gen_range(0.05..0.2));
            }
            let g = in_group(&a, k, tol, false).map_err(|e| e.to_string())?;
            let p = preserves(&a, &s, tol, false).map_err(|e| e.to_string())?;
            ensure(g == p, || format!("k={k}: sample {i} in_group={g} preserves={p}"))?;
            members += usize::from(g);
        }
        ensure((100..200).contains(&members), || format!("k={k}: {members} members in 200 samples"))?;
        ensure(stabilizer_matches_group(k, 200, 99 + idx as u64, tol).map_err(|e| e.to_string())?, || format!("k={k}: component samples disagree"))?;
    }
    for k in [-9.0, -4.0, -1.0, -0.25] {
        let PointStructure::Lorentz { g } = structure_from_k(KValue::Finite(k)) else {
            return Err(format!("k={k} is not Lorentzian"));
        };
        let negative = g.0.clone().symmetric_eigen().eigenvalues.iter().filter(|&&e| e < 0.0).count();
        ensure(negative == 1, || format!("k={k}: {negative} negative eigenvalues"))?;
    }
    ensure(speed_of_interactions(KValue::Finite(-9.0)) == Speed::Finite(3.0), || "k=-9 speed".into())?;
    ensure(speed_of_interactions(KValue::Omega) == Speed::Infinite, || "omega speed".into())?;
    for k in [0.5, 1.0, 2.0] {
        ensure(speed_of_interactions(KValue::Finite(k)) == Speed::Undefined, || format!("k={k} speed"))?;
    }
    Ok("preserves == in_group on 6 x 200 samples; one negative eigenvalue; speeds 3/infinite/undefined".into())
}

fn bundle_suite() -> Check {
    let chart = Chart::spanning("U", vec![33], &[-1.0], &[1.0]).map_err(|e| e.to_string())?;
    let kfield = LatticeMap::from_fn(&chart, |_, x| KValue::Finite(x[0]));
    ensure(kfield.values[16] == KValue::Finite(0.0), || "site 16 is not k=0".into())?;
    let b = example_congruence(&kfield).map_err(|e| e.to_string())?;
    let rep = check_constant_dimension(&b);
    ensure(rep.constant() && rep.dims[0].iter().all(|&d| d == 6), || format!("dims {:?}", rep.dims))?;

    let deg = example_degenerate(33).map_err(|e| e.to_string())?;
    let z = deg.zero_site;
    ensure(deg.family.p(z) == 0.0, || "zero site".into())?;
    ensure(deg.fiber_dimensions[z] == 0 && deg.fiber_dimensions[z - 1] == 1 && deg.fiber_dimensions[z + 1] == 1, || "no 1->0 drop".into())?;
    ensure(deg.dimension.flagged == vec![(0, z)], || format!("flagged {:?}", deg.dimension.flagged))?;
    ensure(matches!(deg.across_zero, FamilySection::NoSection { .. }), || "section across zero".into())?;
    let mut intervals = 0;
    for lo in [0, 4, 10, 15] {
        for hi in [17, 20, 28, 32] {
            ensure(matches!(deg.family.find_section(lo, hi).map_err(|e| e.to_string())?, FamilySection::NoSection { .. }), || {
                format!("section found on sites {lo}..={hi}")
            })?;
            intervals += 1;
        }
    }
    let FamilySection::Found(sec) = &deg.left_of_zero else {
        return Err("no section on (-0.9, -0.1)".into());
    };
    let hi = (0..33).rev().find(|&s| deg.family.p(s) <= -0.1 + 1e-12).unwrap_or(0);
    ensure(sec.len() == hi + 1 && deg.family.p(hi) > -0.2, || "left section does not reach -0.1".into())?;
    Ok(format!("congruence dims all 6; drop 1->0 at p=0; {intervals} intervals across 0 without section; section on [-0.9,-0.1]"))
}

fn smooth(chart: &Chart, m: usize) -> LatticeMap<DVector<f64>> {
    LatticeMap::from_fn(chart, |_, x| DVector::from_fn(m, |i, _| 1.0 + (i as f64 + 1.0) * x[0] - 0.5 * x[x.len() - 1] + 0.2 * (i as f64 * x[0]).sin()))
}

fn gauge_suite() -> Check {
    let square = Chart::spanning("U", vec![5, 5], &[-1.0, -1.0], &[1.0, 1.0]).map_err(|e| e.to_string())?;
    let bundles = [
        trivial_so2_bundle(square.clone()),
        GeneralizedBundle::uniform(Atlas::single(square.clone()), GroupSpec::ok(KValue::Finite(1.0))).map_err(|e| e.to_string())?,
    ];
    let mut round_trip: f64 = 0.0;
    let mut pairs = 0;
    for b in &bundles {
        let m = b.fiber_dim;
        let sigma0 = [ObserverSection::identity(&square, m)];
        let psi = ParticleField::single(smooth(&square, m));
        for seed in 0..25u64 {
            let g = random_gauge_map(b, 0, seed, 1.0, 1);
            let moved = gauge_transform(b, &psi, &g, &sigma0, 1e-9).map_err(|e| e.to_string())?;
            let back = gauge_transform(b, &moved, &g.inverse().map_err(|e| e.to_string())?, &sigma0, 1e-9).map_err(|e| e.to_string())?;
            round_trip = round_trip.max(back.max_diff(&psi).map_err(|e| e.to_string())?);
            let orbit = same_orbit(b, &psi, &moved, &sigma0, Default::default()).map_err(|e| e.to_string())?;
            ensure(matches!(orbit, OrbitResult::Yes { .. }), || format!("fiber {m} seed {seed}: {orbit:?}"))?;
            let nat = naturally_indistinguishable(b, &psi, &moved, &sigma0, 20, seed, Default::default()).map_err(|e| e.to_string())?;
            ensure(nat == Indistinguishable::True, || format!("fiber {m} seed {seed}: same orbit but {nat:?}"))?;
            pairs += 1;
        }
    }
    ensure(round_trip <= 1e-10, || format!("round trip error {round_trip:e}"))?;

    let b = &bundles[0];
    let sigma0 = [ObserverSection::identity(&square, 2)];
    let psi = ParticleField::single(smooth(&square, 2));
    for seed in 0..10u64 {
        let mut other = psi.clone();
        let site = 6 + seed as usize;
        other.charts[0].values[site] *= 1.5 + 0.1 * seed as f64;
        let nat = naturally_indistinguishable(b, &psi, &other, &sigma0, 5, seed, Default::default()).map_err(|e| e.to_string())?;
        ensure(matches!(nat, Indistinguishable::False(_)), || format!("mismatch {seed}: {nat:?}"))?;
        let orbit = same_orbit(b, &psi, &other, &sigma0, Default::default()).map_err(|e| e.to_string())?;
        ensure(matches!(orbit, OrbitResult::No { .. }), || format!("mismatch {seed}: {orbit:?}"))?;
    }
    Ok(format!("round trip {round_trip:.1e}; {pairs} same-orbit pairs all indistinguishable; 10 norm mismatches distinguished"))
}

fn cells(n: usize) -> Chart {
    Chart::spanning("U", vec![n + 1, n + 1], &[0.0, 0.0], &[1.0, 1.0]).expect("valid chart")
}

fn field(chart: &Chart) -> LatticeMap<DVector<f64>> {
    LatticeMap::from_fn(chart, |_, x| DVector::from_vec(vec![(x[0] + 0.3).cos() + x[1], 0.5 * (2.0 * x[1]).sin() - x[0]]))
}

fn connection(chart: &Chart) -> ConnectionForm {
    ConnectionForm {
        representation: Representation::Differential,
        dirs: vec![
            LatticeMap::from_fn(chart, |_, x| j().scale(x[1])),
            LatticeMap::from_fn(chart, |_, x| j().scale((3.0 * x[0]).cos())),
        ],
    }
}

fn covariance_suite() -> Check {
    let so2 = GroupSpec::so2();
    let chart = kframe::scenarios::gauge_chart();
    let b = trivial_so2_bundle(chart.clone());
    let psi = kframe::scenarios::gauge_field(&chart);
    let links = kframe::scenarios::gauge_connection(&chart);
    let gauges: Vec<_> = (0..20).map(|s| random_gauge_values(&b, 0, s, 1.0)).collect();
    let mut delta_cov: f64 = 0.0;
    for g in &gauges {
        delta_cov = delta_cov.max(check_covariance(&psi, &links, g, &so2, 1e-10).map_err(|e| e.to_string())?.delta_cov);
    }
    ensure(delta_cov <= 1e-10, || format!("link covariance defect {delta_cov:e}"))?;
    let mut dens = Vec::new();
    for kind in [DensityKind::CovariantKinetic, DensityKind::YangMills] {
        let rep = invariance_report(&DensitySpec::new(kind), &psi, &links, &so2, &gauges, 1e-10).map_err(|e| e.to_string())?;
        ensure(rep.max_delta <= 1e-10, || format!("{kind:?} deviation {:e}", rep.max_delta))?;
        dens.push(rep.max_delta);
    }

    let naive = DensitySpec::new(DensityKind::NaiveKinetic);
    let constant: Vec<_> = (0..5).map(|i| LatticeMap::constant(&chart, rot(0.4 + i as f64))).collect();
    let rep = invariance_report(&naive, &psi, &links, &so2, &constant, 1e-10).map_err(|e| e.to_string())?;
    ensure(rep.max_delta <= 1e-10, || format!("naive under constant g: {:e}", rep.max_delta))?;
    let shipped: serde_json::Value = read_json(&data("gauge/naive_bump/gauge.json")).map_err(|e| e.to_string())?;
    let samples: Vec<GaugeSampleDoc> = parse(shipped["gauges"].clone()).map_err(|e| e.to_string())?;
    let bump = samples.iter().find(|s| matches!(s, GaugeSampleDoc::Bump { .. })).ok_or("no shipped bump")?;
    let bump = bump.expand(&b, 0).map_err(|e| e.to_string())?;
    let rep = invariance_report(&naive, &psi, &links, &so2, &bump, 1e-10).map_err(|e| e.to_string())?;
    ensure(rep.max_delta > 1e-3 && rep.non_invariant, || format!("naive under bump: {:e}", rep.max_delta))?;
    let bump_delta = rep.max_delta;

    let defect = |n: usize| -> Result<f64, String> {
        let c = cells(n);
        let g = LatticeMap::from_fn(&c, |_, x| expm(&j().scale((2.0 * x[0]).sin() + x[1] * x[1])));
        Ok(check_covariance(&field(&c), &connection(&c), &g, &so2, 1.0).map_err(|e| e.to_string())?.delta_cov)
    };
    let ratio = defect(16)? / defect(32)?;
    ensure(ratio >= 3.5, || format!("refinement ratio {ratio:.3}"))?;

    let scaling = GroupSpec::Generators(vec![MatN::from_diagonal(&[1.0, 0.0])]);
    let zero = ConnectionForm::zero(&chart, 2, Representation::Differential);
    let profiles: Vec<_> = (0..5)
        .map(|i| LatticeMap::from_fn(&chart, |_, x| MatN::from_diagonal(&[(i as f64 * x[0] - 2.0 * x[1] * x[0] + 0.3).exp(), 1.0])))
        .collect();
    let rep = invariance_report(&DensitySpec::new(DensityKind::FootnoteDegenerate), &psi, &zero, &scaling, &profiles, 1e-12)
        .map_err(|e| e.to_string())?;
    ensure(rep.max_delta <= 1e-12, || format!("footnote density deviation {:e}", rep.max_delta))?;
    Ok(format!(
        "link defect {delta_cov:.1e}; densities {:.1e}/{:.1e}; naive bump {bump_delta:.2e}; ratio {ratio:.2}; footnote {:.1e}",
        dens[0], dens[1], rep.max_delta
    ))
}

fn conformal_error(n: usize) -> f64 {
    let chart = cells(n);
    let alpha = [0.8, -0.5];
    let g = LatticeMap::from_fn(&chart, |_, x| MatN::identity(4).scale((2.0 * (alpha[0] * x[0] + alpha[1] * x[1])).exp()));
    let dphi = [alpha[0], alpha[1], 0.0, 0.0];
    let delta = |i: usize, j: usize| f64::from(u8::from(i == j));
    let exact = Christoffel::from_fn(&chart, 4, |_, a, b, c| delta(a, b) * dphi[c] + delta(a, c) * dphi[b] - delta(b, c) * dphi[a]);
    let lc = levi_civita(&g).expect("invertible metric");
    (0..chart.num_sites())
        .filter(|&s| chart.is_interior(s))
        .map(|s| (&lc.gamma.values[s] - &exact.gamma.values[s]).amax())
        .fold(0.0, f64::max)
}

fn spacetime_suite() -> Check {
    let chart = cells(6);
    let spd = MatN::from_row_slice(4, &[2.0, 0.3, 0.0, 0.1, 0.3, 1.5, 0.2, 0.0, 0.0, 0.2, 1.0, 0.0, 0.1, 0.0, 0.0, 3.0]);
    for g in [MatN::from_diagonal(&[-1.0, 1.0, 1.0, 1.0]), spd] {
        let lc = levi_civita(&LatticeMap::constant(&chart, g)).map_err(|e| e.to_string())?;
        ensure(lc.gamma.values.iter().all(|v| v.iter().all(|&x| x == 0.0)), || "constant metric with nonzero symbols".into())?;
    }
    let ratio = conformal_error(16) / conformal_error(32);
    ensure(ratio >= 3.5, || format!("conformal refinement ratio {ratio:.3}"))?;

    let metric = LatticeMap::from_fn(&chart, |_, x| MatN::identity(4).scale((0.6 * x[0] - 0.2 * x[1]).exp()));
    let lc = levi_civita(&metric).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let gamma = Christoffel::from_fn(&chart, 4, |s, a, b, c| lc.get(s, a, b, c) + noise[(a * 4 + b) * 4 + c] * (1.0 + 0.01 * s as f64));
    let dec = decompose_connection(&gamma, &metric).map_err(|e| e.to_string())?;
    let err = dec.reassemble().map_err(|e| e.to_string())?.max_diff(&gamma).map_err(|e| e.to_string())?;
    ensure(err <= 4.0 * f64::EPSILON * 4.0, || format!("reassembly error {err:e}"))?;
    ensure(dec.symmetric.max_diff(&dec.symmetric.swapped()).map_err(|e| e.to_string())? == 0.0, || "T_S not symmetric".into())?;

    let spatial = LatticeMap::constant(&chart, MatN::from_diagonal(&[0.0, 1.0, 1.0, 1.0]));
    let dt = LatticeMap::constant(&chart, DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]));
    let flat = check_galilean(&Christoffel::zeros(&chart, 4), &dt, &spatial, 1e-9).map_err(|e| e.to_string())?;
    ensure(flat.galilean && flat.d_omega == 0.0, || format!("flat structure: {flat:?}"))?;
    let twisted = LatticeMap::from_fn(&chart, |_, p| DVector::from_vec(vec![1.0, 0.0, p[1], 0.0]));
    let mut torsion_free = 0;
    for (name, gamma) in galilean_candidates(&twisted, &spatial, 3).map_err(|e| e.to_string())? {
        let rep = check_galilean(&gamma, &twisted, &spatial, 1e-9).map_err(|e| e.to_string())?;
        ensure(rep.d_omega > 0.5, || format!("{name}: d omega {}", rep.d_omega))?;
        ensure(!rep.inconsistent, || format!("{name}: inconsistent report"))?;
        if rep.torsion <= 1e-9 {
            ensure(!rep.galilean, || format!("{name}: torsion-free and Galilean"))?;
            torsion_free += 1;
        }
    }
    Ok(format!("constant metrics flat; conformal ratio {ratio:.2}; reassembly {err:.1e}; {torsion_free} torsion-free candidates rejected"))
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_kframe")).args(args).output().expect("run kframe");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn cli_suite() -> Check {
    let d = |rel: &str| data(rel).display().to_string();
    let gauge: Vec<String> = ["field", "connection", "gauge"].iter().map(|f| d(&format!("gauge/link_covariant/{f}.json"))).collect();
    let orbit: Vec<String> = ["psi", "psibar", "bundle"].iter().map(|f| d(&format!("orbit/two_charts/{f}.json"))).collect();
    let mut runs: Vec<Vec<String>> = vec![
        vec!["classify".into(), d("classify/boosts.json")],
        vec!["structure".into(), d("structure/sign_crossing.json")],
        vec!["bundle-check".into(), "--example".into(), "congruence".into(), "--k".into(), "p0".into()],
    ];
    runs.push(["gauge-check".to_string()].into_iter().chain(gauge).collect());
    runs.push(["orbit".to_string(), "--seed".into(), "7".into()].into_iter().chain(orbit.clone()).collect());
    for args in &runs {
        for format in ["text", "json"] {
            let mut full: Vec<&str> = vec!["--format", format];
            full.extend(args.iter().map(String::as_str));
            let first = run_cli(&full);
            let second = run_cli(&full);
            ensure(first == second, || format!("{args:?} output differs between runs"))?;
        }
    }
    let bad = tempfile::NamedTempFile::new().map_err(|e| e.to_string())?;
    std::fs::write(bad.path(), "{\"matrices\": [[1, 2]").map_err(|e| e.to_string())?;
    let bad_path = bad.path().display().to_string();
    let mut tight = vec!["orbit", "--max-chain", "1"];
    tight.extend(orbit.iter().map(String::as_str));
    let mixed = d("classify/mixed.json");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["classify", runs[0][1].as_str()], 0),
        (vec!["classify", mixed.as_str()], 1),
        (vec!["classify", bad_path.as_str()], 2),
        (tight, 3),
    ];
    for (args, code) in &cases {
        let (got, _) = run_cli(args);
        ensure(got == *code, || format!("{args:?}: exit {got}, expected {code}"))?;
    }
    Ok(format!("{} commands byte-identical across runs in both formats; exits 0/1/2/3 as expected", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("group suite", group_suite),
        ("classification suite", classification_suite),
        ("structure suite", structure_suite),
        ("bundle suite", bundle_suite),
        ("gauge suite", gauge_suite),
        ("covariance suite", covariance_suite),
        ("spacetime-connection suite", spacetime_suite),
        ("CLI determinism", cli_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
