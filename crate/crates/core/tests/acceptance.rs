// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! with its wall time and exits nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qdescent::certify::{parse_factor_response, verify_certificate};
use qdescent::class_group::{
    class_group, class_number_analytic, class_number_forms_oracle, verify_m_set, MSetStatus, Method,
};
use qdescent::ideal::sqrt_2;
use qdescent::mordell::{brute_force_points, check_hypotheses, descent_trace, solve, x_odd_residue_counterexample};
use qdescent::times_table::{parse_expr, prove_eq, RingExpr, TimesTable};
use qdescent::{squarefree, Ideal, Int, QParams, QTable, Rat, ZParams, ZQuad};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn int(v: i64) -> Int {
    Int::from(v)
}

fn sweep() -> Vec<i64> {
    (-100..=-1)
        .filter(|&d: &i64| matches!(d.rem_euclid(4), 2 | 3) && squarefree(&int(d)).unwrap())
        .collect()
}

fn random_ideal(rng: &mut ChaCha8Rng, d: i64) -> Ideal {
    let params = ZParams::sqrt(int(d));
    loop {
        let gens: Vec<ZQuad> = (0..2)
            .map(|_| ZQuad::new(int(rng.gen_range(-40..=40)), int(rng.gen_range(-40..=40)), params.clone()))
            .collect();
        if let Ok(i) = Ideal::from_generators(&params, &gens) {
            return i;
        }
    }
}

fn class_numbers() -> Result<(), String> {
    for (d, h) in [(-1, 1), (-2, 1), (-5, 2), (-6, 2), (-13, 2)] {
        let got = class_group(&int(d), Method::Minkowski).map_err(|e| e.to_string())?.h;
        if got != h {
            return Err(format!("d = {d}: h = {got}, expected {h}"));
        }
    }
    Ok(())
}

fn three_oracles() -> Result<(), String> {
    for d in sweep() {
        let d = int(d);
        let a = class_group(&d, Method::Minkowski).map_err(|e| e.to_string())?.h;
        let b = class_number_analytic(&d).map_err(|e| e.to_string())?;
        let c = class_number_forms_oracle(&d).map_err(|e| e.to_string())?;
        if a != b || b != c {
            return Err(format!("d = {d}: group {a}, analytic {b}, forms {c}"));
        }
    }
    Ok(())
}

fn parity() -> Result<(), String> {
    for d in sweep().into_iter().filter(|&d| d < -2) {
        let h = class_group(&int(d), Method::Minkowski).map_err(|e| e.to_string())?.h;
        if h % 2 != 0 {
            return Err(format!("d = {d}: h = {h} is odd"));
        }
    }
    Ok(())
}

fn m_sets() -> Result<(), String> {
    let ms = |v: &[i64]| v.iter().map(|&x| int(x)).collect::<Vec<_>>();
    for d in [-1, -2, -5, -6] {
        let c = verify_m_set(&int(d), &ms(&[1, 2])).map_err(|e| e.to_string())?;
        if !c.is_verified() {
            return Err(format!("d = {d}, M = {{1, 2}}: {:?}", c.status));
        }
    }
    let c = verify_m_set(&int(-13), &ms(&[1, 2, 3, 4])).map_err(|e| e.to_string())?;
    if !c.is_verified() {
        return Err(format!("d = -13, M = {{1, 2, 3, 4}}: {:?}", c.status));
    }
    match verify_m_set(&int(-5), &ms(&[1])).map_err(|e| e.to_string())?.status {
        MSetStatus::Refuted { .. } => Ok(()),
        s => Err(format!("d = -5, M = {{1}}: {s:?}")),
    }
}

fn ideal_algebra() -> Result<(), String> {
    for d in sweep() {
        let s = sqrt_2(&int(d)).map_err(|e| e.to_string())?;
        let two = Ideal::of_integer(s.params(), &int(2)).map_err(|e| e.to_string())?;
        if s.mul(&s).map_err(|e| e.to_string())? != two {
            return Err(format!("d = {d}: sqrt_2^2 != <2>"));
        }
    }
    let ds = sweep();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let d = ds[rng.gen_range(0..ds.len())];
        let (i, j) = (random_ideal(&mut rng, d), random_ideal(&mut rng, d));
        let ij = i.mul(&j).map_err(|e| e.to_string())?;
        if ij.abs_norm() != &(i.abs_norm() * j.abs_norm()) {
            return Err(format!("d = {d}: N({i} * {j}) not multiplicative"));
        }
    }
    for _ in 0..1000 {
        let d = ds[rng.gen_range(0..ds.len())];
        let i = random_ideal(&mut rng, d);
        let norm_ideal = Ideal::of_integer(i.params(), i.abs_norm()).map_err(|e| e.to_string())?;
        if i.mul(&i.conj()).map_err(|e| e.to_string())? != norm_ideal {
            return Err(format!("d = {d}: I * conj(I) != <N(I)> for {i}"));
        }
    }
    Ok(())
}

fn mordell_instances() -> Result<(), String> {
    let expected: [(i64, &[(i64, i64)]); 5] = [
        (-1, &[(1, 0)]),
        (-2, &[(3, -5), (3, 5)]),
        (-5, &[]),
        (-6, &[]),
        (-13, &[(17, -70), (17, 70)]),
    ];
    for (d, pts) in expected {
        let d = int(d);
        let inst = check_hypotheses(&d).map_err(|e| e.to_string())?;
        let got = solve(&inst).map_err(|e| e.to_string())?.points();
        let want: Vec<(Int, Int)> = pts.iter().map(|&(x, y)| (int(x), int(y))).collect();
        if got != want {
            return Err(format!("d = {d}: solve gave {got:?}"));
        }
        let brute = brute_force_points(&d, 10_000);
        if brute != want {
            return Err(format!("d = {d}: brute force gave {brute:?}"));
        }
    }
    Ok(())
}

fn descents() -> Result<(), String> {
    for (d, x, y) in [(-2, 3, 5), (-2, 3, -5), (-13, 17, 70), (-13, 17, -70)] {
        let t = descent_trace(&int(d), &int(x), &int(y)).map_err(|e| format!("({d}, {x}, {y}): {e}"))?;
        if t.z.cube() != ZQuad::new(int(y), int(1), ZParams::sqrt(int(d))) || t.b.abs() != 1 {
            return Err(format!("({d}, {x}, {y}): inconsistent trace"));
        }
    }
    Ok(())
}

fn identities() -> Result<(), String> {
    let e = |s: &str| parse_expr::<Rat>(s).map_err(|e| e.to_string());
    let trivial = TimesTable::<Rat>::trivial();
    let lhs = e("(m * (d * 3 + m^2))^2")?;
    let rhs = e("(m^2 - d)^3 + d")?;
    for branch in ["1 - 3 * m^2", "-1 - 3 * m^2"] {
        let sub = e(branch)?;
        let started = Instant::now();
        let ok = prove_eq(&lhs.substitute("d", &sub), &rhs.substitute("d", &sub), &trivial).map_err(|e| e.to_string())?;
        if !ok || started.elapsed() > Duration::from_secs(5) {
            return Err(format!("branch d = {branch}: proved = {ok}, {:?}", started.elapsed()));
        }
    }
    let x = || RingExpr::<Rat>::var("x");
    let y = || RingExpr::<Rat>::var("y");
    let lhs = (x() - y()) * (x().pow(2) + x() * y() + y().pow(2));
    let rhs = x().pow(3) - y().pow(3);
    let params = [(0, -1), (0, -2), (0, -5), (0, -6), (0, -13), (1, -1), (1, 3)];
    for (a, b) in params {
        let table = QTable::for_quad(&QParams::new(Rat::from_integer(int(a)), Rat::from_integer(int(b))));
        let started = Instant::now();
        let ok = prove_eq(&lhs, &rhs, &table).map_err(|e| e.to_string())?;
        if !ok || started.elapsed() > Duration::from_secs(5) {
            return Err(format!("cube difference over (a, b) = ({a}, {b}): proved = {ok}, {:?}", started.elapsed()));
        }
    }
    Ok(())
}

fn residue_lemma() -> Result<(), String> {
    match x_odd_residue_counterexample() {
        None => Ok(()),
        Some((d, x, y)) => Err(format!("even x = {x} with y = {y}, d = {d} mod 8")),
    }
}

fn certificates() -> Result<(), String> {
    let valid = "[(11, 1), (101, 1)]";
    let f = parse_factor_response(valid).map_err(|e| e.to_string())?;
    verify_certificate(&int(1111), &f).map_err(|r| format!("{r:?}"))?;
    let alphabet: Vec<char> = "0123456789()[], ".chars().collect();
    let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut tested = 0;
    while tested < 1000 {
        let mut chars: Vec<char> = valid.chars().collect();
        let c = alphabet[rng.gen_range(0..alphabet.len())];
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(0..chars.len());
                chars[i] = c;
            }
            1 => chars.insert(rng.gen_range(0..=chars.len()), c),
            _ => {
                chars.remove(rng.gen_range(0..chars.len()));
            }
        }
        let mutated: String = chars.into_iter().collect();
        if squash(&mutated) == squash(valid) {
            continue;
        }
        tested += 1;
        if let Ok(f) = parse_factor_response(&mutated) {
            if verify_certificate(&int(1111), &f).is_ok() {
                return Err(format!("mutation {mutated:?} verified"));
            }
        }
    }
    Ok(())
}

type Criterion = (u32, &'static str, u64, fn() -> Result<(), String>);

const CRITERIA: [Criterion; 10] = [
    (1, "class numbers for d = -1, -2, -5, -6, -13", 1, class_numbers),
    (2, "three-oracle class number agreement, -100 <= d <= -1", 60, three_oracles),
    (3, "2 | h for every swept d < -2", 60, parity),
    (4, "M-set certificates", 10, m_sets),
    (5, "ideal algebra", 30, ideal_algebra),
    (6, "Mordell instances against brute force", 30, mordell_instances),
    (7, "descent traces", 5, descents),
    (8, "symbolic identities", 10, identities),
    (9, "residue lemma mod 8", 1, residue_lemma),
    (10, "factorization certificates and fuzzing", 5, certificates),
];

fn main() -> ExitCode {
    let mut failures = 0;
    for (id, name, limit, run) in CRITERIA {
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = started.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed > Duration::from_secs(limit) {
                Err(format!("took {elapsed:?}, limit {limit} s"))
            } else {
                Ok(())
            }
        });
        match outcome {
            Ok(()) => println!("PASS criterion {id:>2}: {name} ({:.3} s)", elapsed.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {id:>2}: {name} ({:.3} s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failures, CRITERIA.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
