use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::path::Path;

use qsa_core::analysis::{error_scaling, strength_target, strength_toric, OffsetMode, StrengthParams};
use qsa_core::anyon::{
    braid, cnot_truth_table, default_exit, encircling_loop, hole_logicals, magic_state, memory_basis, memory_encode,
    memory_loop_state, syndrome_by_commutation, syndrome_of, Exit, LogicalQubit, StringPath,
};
use qsa_core::dense::{distance, expm, max_dense_qubits, probe_states, program_unitary, C64};
use qsa_core::lattice::{
    build_terms, digital_sequence, ground_state_projector, ground_state_sweep, lattice_graph, plaquette_schedule,
    term_schedule, LatticeSpec,
};
use qsa_core::schedule::{
    compile_resolved, depth_bound, replay_symbolic, validate, ConnectivityGraph, PulseProgram, QsaSchedule, Resolved,
    Strategy,
};
use qsa_core::{PauliString, WeightedPauliSum};

use crate::report::{write_json, CliError, CliResult, Recorder};
use crate::{AnalyzeCmd, AnyonCmd, Command, CompileArgs, ToricCmd, VerifyArgs};

const EXACT: f64 = 1e-10;

pub fn run(cmd: &Command, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    match cmd {
        Command::Compile(a) => compile_cmd(a, seed, rec),
        Command::Verify(a) => verify_cmd(a, seed, rec),
        Command::Toric { action } => toric_cmd(action, seed, rec),
        Command::Anyon { action } => anyon_cmd(action, rec),
        Command::Analyze { action } => analyze_cmd(action, seed, rec),
    }
}

fn graph_arg(rec: &mut Recorder, arg: &str, n: usize) -> CliResult<ConnectivityGraph> {
    Ok(match arg {
        "complete" => ConnectivityGraph::complete(n),
        "path" => ConnectivityGraph::path(n),
        "path_nnn" => ConnectivityGraph::path_with_next_nearest(n),
        file => rec.read_json(Path::new(file))?,
    })
}

fn pair_arg(s: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || CliError::Usage(format!("expected \"i,j\", got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let i = parts[0].trim().parse().map_err(|_| bad())?;
    let j = parts[1].trim().parse().map_err(|_| bad())?;
    Ok((i, j))
}

fn list_arg(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("not a number: {x:?}")))
        })
        .collect()
}

fn lattice_spec(rec: &mut Recorder, path: &Path) -> CliResult<LatticeSpec> {
    let spec: LatticeSpec = rec.read_json(path)?;
    spec.validate()?;
    rec.metric("n_sites", spec.n_sites());
    Ok(spec)
}

/// Program vs `exp(−i·tg·target)`: full matrices when small enough, else
/// seeded random states.
fn oracle(
    rec: &mut Recorder,
    name: &str,
    prog: &PulseProgram,
    target: &PauliString,
    tg: f64,
    seed: u64,
    states: usize,
) -> CliResult<()> {
    let n = target.n_sites();
    let h = WeightedPauliSum::from_string(target)?;
    if n <= max_dense_qubits() {
        let d = distance(&program_unitary(prog)?, &expm(&h, tg)?)?;
        rec.metric("oracle", "dense");
        rec.bound(name, d, EXACT);
    } else {
        let probe = probe_states(
            n,
            states,
            seed,
            |psi| {
                let mut s = psi.clone();
                s.apply_program(prog)?;
                Ok(s)
            },
            |psi| psi.evolve_taylor(&h, tg),
        )?;
        rec.metric("oracle", "states");
        rec.metric("oracle_states", probe.states);
        rec.bound(name, probe.max_distance, EXACT);
    }
    Ok(())
}

fn bound_strategy(r: Resolved) -> Option<Strategy> {
    match r {
        Resolved::Doubling => Some(Strategy::Doubling),
        Resolved::LineEndpoints => Some(Strategy::LineEndpoints),
        Resolved::SingleEndpoint => Some(Strategy::SingleEndpoint),
        Resolved::Greedy => None,
    }
}

fn compile_cmd(a: &CompileArgs, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    let target: PauliString = a.target.parse()?;
    let n = target.n_sites();
    let graph = graph_arg(rec, &a.graph, n)?;
    let strategy: Strategy = a.strategy.parse()?;
    let (s, how) = compile_resolved(&target, &graph, strategy)?;
    let s = s.with_tg(a.tg);
    rec.metric("n_sites", n);
    rec.metric("weight", target.weight());
    rec.metric("resolved", how.to_string());
    rec.metric("depth", s.depth());
    if let Some(b) = bound_strategy(how) {
        let bound = depth_bound(target.weight(), b)?;
        rec.metric("depth_bound", bound);
        rec.flag("depth_law", s.depth() == bound, None);
    }
    let replayed = replay_symbolic(&s)?;
    rec.flag("replay_equality", replayed == target, Some(replayed.to_string()));
    let v = validate(&s, &graph);
    rec.flag("validate", v.is_clean(), None);
    let prog = s.pulse_program()?;
    rec.metric("pulses", prog.len());
    oracle(rec, "dense_identity", &prog, &target, a.tg, seed, 4)?;
    if let Some(out) = &a.out {
        write_json(out, &s)?;
        let text = std::fs::read_to_string(out).map_err(|e| CliError::Io {
            path: out.display().to_string(),
            message: e.to_string(),
        })?;
        let back: QsaSchedule = serde_json::from_str(&text).map_err(|e| CliError::Json {
            path: out.display().to_string(),
            message: e.to_string(),
        })?;
        rec.flag("round_trip", back == s && validate(&back, &graph).is_clean(), None);
        rec.metric("out", out.display().to_string());
    } else {
        rec.metric("schedule", &s);
    }
    Ok(())
}

fn verify_cmd(a: &VerifyArgs, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    let mut s: QsaSchedule = rec.read_json(&a.schedule)?;
    if let Some(tg) = a.tg {
        s = s.with_tg(tg);
    }
    let graph = graph_arg(rec, &a.graph, s.n_sites)?;
    rec.metric("n_sites", s.n_sites);
    rec.metric("depth", s.depth());
    let v = validate(&s, &graph);
    if v.is_clean() {
        rec.flag("validate", true, None);
    }
    for violation in &v.violations {
        let detail = serde_json::to_string(violation).ok();
        rec.flag(violation.name(), false, detail);
    }
    if v.is_clean() {
        let prog = s.pulse_program()?;
        rec.metric("pulses", prog.len());
        oracle(rec, "dense_identity", &prog, &s.target, s.seed.tg, seed, a.states)?;
    }
    Ok(())
}

fn toric_cmd(action: &ToricCmd, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    match action {
        ToricCmd::Build(a) => {
            let spec = lattice_spec(rec, &a.spec)?;
            let set = build_terms(&spec)?;
            let graph = lattice_graph(&spec)?;
            let mut commute = true;
            for (k, x) in set.terms.iter().enumerate() {
                for y in &set.terms[k + 1..] {
                    commute &= x.operator.commutes(&y.operator)?;
                }
            }
            rec.flag("terms_commute", commute, None);
            let mut disjoint = true;
            for (_, group) in set.groups() {
                let mut seen = std::collections::BTreeSet::new();
                for t in group {
                    disjoint &= t.operator.support().into_iter().all(|x| seen.insert(x));
                }
            }
            rec.flag("groups_disjoint", disjoint, None);
            let mut exact = true;
            let mut depth = 0;
            for t in &set.terms {
                let s = term_schedule(&spec, t, spec.coupling)?;
                exact &= replay_symbolic(&s)? == t.operator && validate(&s, &graph).is_clean();
                depth = depth.max(s.depth());
            }
            rec.flag("term_schedules", exact, None);
            rec.metric("terms", &set.terms);
            rec.metric("groups", set.groups().len());
            rec.metric("max_depth", depth);
        }
        ToricCmd::Ground(a) => {
            let spec = lattice_spec(rec, &a.spec)?;
            let sweep = ground_state_sweep(&spec)?;
            let proj = ground_state_projector(&spec)?;
            let fidelity = sweep.state.inner(&proj)?.norm();
            rec.bound("sweep_fidelity", 1.0 - fidelity, EXACT);
            let mut worst: f64 = 0.0;
            for t in build_terms(&spec)?.terms {
                if (t.index.0 + t.index.1) % 2 == 0 {
                    worst = worst.max((sweep.state.expectation(&t.operator)? - C64::new(1.0, 0.0)).norm());
                }
            }
            rec.bound("even_plaquettes", worst, EXACT);
            rec.metric("fidelity", fidelity);
            rec.metric("stages", sweep.stages);
            rec.metric("steps", sweep.steps.len());
        }
        ToricCmd::Digital { spec, j_tau, states } => {
            let spec = lattice_spec(rec, &spec.spec)?;
            let seq = digital_sequence(&spec, *j_tau)?;
            let prog = seq.program()?;
            let sum = build_terms(&spec)?.sum()?;
            let probe = probe_states(
                spec.n_sites(),
                *states,
                seed,
                |psi| {
                    let mut s = psi.clone();
                    s.apply_program(&prog)?;
                    Ok(s)
                },
                |psi| psi.evolve_taylor(&sum, -j_tau),
            )?;
            rec.bound("digital_vs_exact", probe.max_infidelity, 1e-8);
            rec.metric("stages", seq.stages.len());
            rec.metric("pulses", prog.len());
            rec.metric("max_distance", probe.max_distance);
            rec.metric("states", probe.states);
        }
    }
    Ok(())
}

fn hole_qubit(spec: &LatticeSpec, hole: usize, exit: Option<&str>) -> CliResult<LogicalQubit> {
    let h = spec
        .holes
        .get(hole)
        .ok_or_else(|| CliError::Usage(format!("spec has no hole {hole}")))?;
    let exit: Exit = match exit {
        Some(e) => e.parse()?,
        None => default_exit(h.kind),
    };
    Ok(hole_logicals(spec, hole, exit)?)
}

fn anyon_cmd(action: &AnyonCmd, rec: &mut Recorder) -> CliResult<()> {
    match action {
        AnyonCmd::Syndrome { spec, path } => {
            let spec = lattice_spec(rec, &spec.spec)?;
            let path: StringPath = rec.read_json(path)?;
            let by_rule = syndrome_of(&path, &spec)?;
            let by_commutation = syndrome_by_commutation(&path, &spec)?;
            rec.flag("routes_agree", by_rule == by_commutation, None);
            rec.metric("excitations", &by_rule.excitations);
        }
        AnyonCmd::Braid { spec, path, at, site } => {
            let spec = lattice_spec(rec, &spec.spec)?;
            let path = match path {
                Some(p) => rec.read_json(p)?,
                None => {
                    let (i, j) = pair_arg(at)?;
                    encircling_loop(&spec, i, j)?
                }
            };
            let e_site = match site {
                Some(s) => pair_arg(s)?,
                None => (path.sites[0][0], path.sites[0][1]),
            };
            let r = braid(&spec, e_site, &path, 1e-8)?;
            rec.bound("braid_phase", r.distance, 1e-8);
            rec.metric("phase", [r.phase.re, r.phase.im]);
            rec.metric("expected", r.expected);
            rec.metric("loop", &path);
        }
        AnyonCmd::Memory { spec, tg, amplitudes } => {
            let spec = lattice_spec(rec, &spec.spec)?;
            let (basis, loops) = memory_basis(&spec)?;
            let mut worst: f64 = 0.0;
            for a in 0..4 {
                for b in a + 1..4 {
                    worst = worst.max(basis[a].inner(&basis[b])?.norm());
                }
            }
            rec.bound("basis_orthogonal", worst, EXACT);
            let tg = tg.unwrap_or(FRAC_PI_8);
            let m = memory_loop_state(&spec, true, tg)?;
            let want = [C64::new(tg.cos(), 0.0), C64::new(0.0, -tg.sin())];
            let err = (m.overlaps[0] - want[0]).norm().max((m.overlaps[1] - want[1]).norm());
            rec.bound("single_loop_amplitudes", err, EXACT);
            rec.metric("logicals", loops.logicals().map(|p| p.to_string()));
            if let Some(text) = amplitudes {
                let amps = parse_amplitudes(text)?;
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                let m = memory_encode(&spec, amps)?;
                let mut err: f64 = 0.0;
                for k in 0..4 {
                    err = err.max((m.overlaps[k] - amps[k] / norm).norm());
                }
                rec.bound("encoded_overlaps", err, 1e-8);
                rec.metric("overlaps", m.overlaps.map(|c| [c.re, c.im]));
                rec.metric("global_phase", m.global_phase);
            }
        }
        AnyonCmd::Magic {
            spec,
            hole,
            exit,
            theta,
        } => {
            let spec = lattice_spec(rec, &spec.spec)?;
            let q = hole_qubit(&spec, *hole, exit.as_deref())?;
            let m = magic_state(&spec, &q, theta.unwrap_or(FRAC_PI_4))?;
            rec.bound("magic_infidelity", 1.0 - m.fidelity, EXACT);
            rec.metric("theta", m.theta);
            rec.metric("fidelity", m.fidelity);
            rec.metric("global_phase", m.global_phase);
        }
        AnyonCmd::Cnot {
            spec,
            control,
            target,
            prep_tg,
        } => {
            let spec = lattice_spec(rec, &spec.spec)?;
            let c = hole_qubit(&spec, *control, None)?;
            let t = hole_qubit(&spec, *target, None)?;
            let r = cnot_truth_table(&spec, &c, &t, *prep_tg)?;
            rec.bound("truth_table", r.max_distance, EXACT);
            rec.bound("braided_preparation", r.braided_preparation, EXACT);
            rec.metric("rows", &r.rows);
        }
    }
    Ok(())
}

fn parse_amplitudes(text: &str) -> CliResult<[C64; 4]> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage("expected four amplitudes re:im".into()));
    }
    let mut out = [C64::new(0.0, 0.0); 4];
    for (o, p) in out.iter_mut().zip(parts) {
        let (re, im) = p.split_once(':').unwrap_or((p, "0"));
        let v = list_arg(&format!("{re},{im}"))?;
        *o = C64::new(v[0], v[1]);
    }
    Ok(out)
}

fn analyze_cmd(action: &AnalyzeCmd, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    match action {
        AnalyzeCmd::Strength {
            g,
            t,
            n,
            tau,
            tau_prime,
            omega,
            omega_prime,
        } => {
            let p = match (tau, tau_prime, omega, omega_prime) {
                (Some(a), Some(b), None, None) => StrengthParams::tau(*g, *t, *a, *b, *n),
                (None, None, Some(a), Some(b)) => StrengthParams::omega(*g, *t, *a, *b, *n),
                _ => {
                    return Err(CliError::Usage(
                        "give either --tau/--tau-prime or --omega/--omega-prime".into(),
                    ))
                }
            };
            let gp = strength_target(&p)?;
            let stretched = p.stretched_time()?;
            let err = (gp * stretched - g * t).abs() / (1.0 + (g * t).abs());
            rec.bound("phase_conservation", err, 1e-12);
            let (a, b) = p.durations()?;
            rec.metric("params", &p);
            rec.metric("g_prime", gp);
            rec.metric("stretched_time", stretched);
            rec.metric("overhead_ratio", *n as f64 * (a + b) / t);
            rec.metric("within_one_order", gp.abs() * 10.0 >= g.abs());
            if *n == 1 {
                rec.metric("toric_strength", strength_toric(&p)?);
            }
        }
        AnalyzeCmd::ErrorScaling {
            schedule,
            spec,
            plaquette,
            tg,
            deltas,
            random,
        } => {
            let (subject, prog) = match (schedule, spec) {
                (Some(path), None) => {
                    let mut s: QsaSchedule = rec.read_json(path)?;
                    if let Some(tg) = tg {
                        s = s.with_tg(*tg);
                    }
                    (s.target.to_string(), s.pulse_program()?)
                }
                (None, Some(path)) => {
                    let spec = lattice_spec(rec, path)?;
                    let (i, j) = pair_arg(plaquette.as_deref().unwrap_or_default())?;
                    let s = plaquette_schedule(&spec, i, j, tg.unwrap_or(0.3))?
                        .ok_or_else(|| CliError::Usage(format!("plaquette ({i},{j}) is not driven")))?;
                    (format!("plaquette ({i},{j})"), s.pulse_program()?)
                }
                _ => return Err(CliError::Usage("give --schedule or --spec with --plaquette".into())),
            };
            let mode = if *random {
                OffsetMode::Random { seed }
            } else {
                OffsetMode::Common
            };
            let r = error_scaling(&subject, &prog, &list_arg(deltas)?, mode)?;
            rec.bound("slope", (r.slope - 1.0).abs(), 0.1);
            rec.metric("report", &r);
        }
    }
    Ok(())
}
