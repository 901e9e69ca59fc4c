use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use nalgebra::Vector3;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};

use super::config::{read_text, AngleUnits, ChainSpec, GapSpec, ProjectConfig};
use super::format::{num, to_json};
use super::{ChainArgs, CliError, Cli, Command, GapArgs, SynthKind};
use crate::fabrication::{compile_plan, flat_pattern, FabricationPlan, GapModel, Method};
use crate::geometry::{dh_to_polyline, fk_chain, polyline_to_dh, wrap_angle, DHChain, DHLink};
use crate::growth::{clearance, tip_pose_at, GrowthState, ObstacleScene};
use crate::measurement::{
    dh_errors, read_marker_csv, recover_dh, synthetic_markers, write_marker_csv, DhParameter,
    MeasuredDH, Phase, SyntheticOptions,
};
use crate::stats::{
    analyze, read_trials_csv, summarize_trials, write_trials_csv, GrowthTrial, Material,
    Sample, SampleTable,
};

/// Method and material pairs that were built (welds tear on LDPE).
const COMBINATIONS: [(Method, Material); 5] = [
    (Method::Tape, Material::Ldpe),
    (Method::Tape, Material::Fabric),
    (Method::Weld, Material::Fabric),
    (Method::Loop, Material::Ldpe),
    (Method::Loop, Material::Fabric),
];
const PRESSURE_STEP_KPA: f64 = 1.38;
const SUCCESSES_PER_ROBOT: usize = 15;

struct Ctx<'a> {
    cli: &'a Cli,
    project: ProjectConfig,
    units: AngleUnits,
    out_dir: PathBuf,
}

impl Ctx<'_> {
    fn chain(&self, args: &ChainArgs) -> Result<DHChain, CliError> {
        self.project.resolve_chain(args.chain.as_deref())
    }

    fn gap(&self, args: &GapArgs) -> Result<GapModel, CliError> {
        let mut spec = self.project.gap.unwrap_or_default();
        if let Some(m) = args.method {
            if Some(m) != self.project.gap.map(|g| g.method) {
                spec = GapSpec {
                    method: m,
                    d_g_mm: None,
                };
            }
        }
        if let Some(d) = args.d_g_mm {
            spec.d_g_mm = Some(d);
        }
        spec.to_model()
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    fn angle(&self, rad: f64) -> f64 {
        self.units.from_rad(rad)
    }

    fn rng(&self) -> StdRng {
        StdRng::seed_from_u64(self.cli.seed.unwrap_or(0))
    }
}

fn required(
    flag: Option<&PathBuf>,
    project: Option<&PathBuf>,
    what: &str,
) -> Result<PathBuf, CliError> {
    flag.or(project)
        .cloned()
        .ok_or_else(|| CliError::MissingData(format!("no {what} file given")))
}

pub(super) fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let project = match &cli.config {
        Some(p) => ProjectConfig::load(p)?,
        None => ProjectConfig::default(),
    };
    let units = if cli.rad {
        AngleUnits::Rad
    } else if cli.deg {
        AngleUnits::Deg
    } else {
        project.angle_units.unwrap_or_default()
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| project.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx {
        cli,
        project,
        units,
        out_dir,
    };
    match &cli.command {
        Command::Design { polyline, radius_mm } => cmd_design(&ctx, polyline.as_ref(), *radius_mm),
        Command::Plan { chain, gap } => cmd_plan(&ctx, chain, gap),
        Command::Pattern { chain, gap } => cmd_pattern(&ctx, chain, gap),
        Command::Fk { chain } => cmd_fk(&ctx, chain),
        Command::Grow {
            chain,
            scene,
            steps,
            sample_step_mm,
        } => cmd_grow(&ctx, chain, scene.as_ref(), *steps, *sample_step_mm),
        Command::Measure {
            chain,
            markers,
            phase,
        } => cmd_measure(&ctx, chain, markers.as_ref(), *phase),
        Command::Analyze { samples, trials } => cmd_analyze(&ctx, samples.as_ref(), trials.as_ref()),
        Command::Synth {
            kind,
            chain,
            position_sigma_mm,
            samples,
            perturb,
        } => cmd_synth(&ctx, *kind, chain, *position_sigma_mm, *samples, *perturb),
    }
}

fn read_polyline(path: &Path) -> Result<Vec<Vector3<f64>>, CliError> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers != ["x_mm", "y_mm", "z_mm"] {
        return Err(CliError::Parse(format!(
            "{}: expected header x_mm,y_mm,z_mm",
            path.display()
        )));
    }
    rdr.deserialize::<(f64, f64, f64)>()
        .enumerate()
        .map(|(i, row)| {
            row.map(|(x, y, z)| Vector3::new(x, y, z))
                .map_err(|e| CliError::Parse(format!("{} row {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn polyline_csv(points: &[Vector3<f64>]) -> String {
    let mut s = String::from("x_mm,y_mm,z_mm\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", num(p.x), num(p.y), num(p.z));
    }
    s
}

fn cmd_design(ctx: &Ctx, polyline: Option<&PathBuf>, radius_mm: f64) -> Result<(), CliError> {
    let path = required(polyline, ctx.project.polyline_file.as_ref(), "polyline")?;
    let points = read_polyline(&path)?;
    let chain = polyline_to_dh(&points, radius_mm)?;
    info!("designed {} links from {} points", chain.len(), points.len());
    ctx.write("chain.json", &to_json(&ChainSpec::from_chain(&chain, ctx.units))?)?;
    Ok(())
}

fn plan_json(ctx: &Ctx, chain: &DHChain, gap: &GapModel, plan: &FabricationPlan) -> Value {
    let u = ctx.units.suffix();
    let joints: Vec<Value> = plan
        .joints
        .iter()
        .zip(&chain.links)
        .map(|(j, link)| {
            json!({
                "index": j.index,
                format!("theta_{u}"): ctx.angle(link.theta),
                "s_tilde_mm": j.s_tilde,
                "axial_start_mm": j.axial_start,
                "circumferential_mm": j.circumferential,
                "d_g_mm": j.d_g,
            })
        })
        .collect();
    json!({
        "method": gap.method,
        "radius_mm": plan.radius,
        "circumference_mm": plan.circumference(),
        "cylinders_mm": plan.cylinders,
        "joints": joints,
        "arc_offsets_mm": plan.arc_offsets,
        "total_tube_length_mm": plan.total_tube_length,
        "warnings": plan.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    })
}

fn plan_table(ctx: &Ctx, chain: &DHChain, plan: &FabricationPlan) -> String {
    let u = ctx.units.suffix();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5} {:>12} {:>12} {:>14} {:>14} {:>12} {:>12}",
        "joint",
        format!("theta_{u}"),
        "s_tilde_mm",
        "axial_mm",
        "circ_mm",
        "l_mm",
        "s_mm"
    );
    for (k, j) in plan.joints.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:>5} {:>12} {:>12} {:>14} {:>14} {:>12} {:>12}",
            j.index,
            num(ctx.angle(chain.links[k].theta)),
            num(j.s_tilde),
            num(j.axial_start),
            num(j.circumferential),
            num(plan.cylinders[k]),
            num(plan.arc_offsets[k])
        );
    }
    let _ = writeln!(s, "total tube length: {} mm", num(plan.total_tube_length));
    for w in &plan.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

fn cmd_plan(ctx: &Ctx, chain_args: &ChainArgs, gap_args: &GapArgs) -> Result<(), CliError> {
    let chain = ctx.chain(chain_args)?;
    let gap = ctx.gap(gap_args)?;
    let plan = compile_plan(&chain, &gap)?;
    print!("{}", plan_table(ctx, &chain, &plan));
    ctx.write("plan.json", &to_json(&plan_json(ctx, &chain, &gap, &plan))?)?;
    Ok(())
}

fn cmd_pattern(ctx: &Ctx, chain_args: &ChainArgs, gap_args: &GapArgs) -> Result<(), CliError> {
    let chain = ctx.chain(chain_args)?;
    let plan = compile_plan(&chain, &ctx.gap(gap_args)?)?;
    ctx.write("pattern.svg", &flat_pattern(&plan).to_svg())?;
    Ok(())
}

fn cmd_fk(ctx: &Ctx, chain_args: &ChainArgs) -> Result<(), CliError> {
    let chain = ctx.chain(chain_args)?;
    let frames = fk_chain(&chain)?;
    let mut s = String::from("frame,x_mm,y_mm,z_mm,qw,qx,qy,qz\n");
    for (k, f) in frames.iter().enumerate() {
        let q = f.quaternion();
        // q and -q are the same rotation; keep w >= 0 so files are stable
        let sign = if q.w < 0.0 { -1.0 } else { 1.0 };
        let t = f.translation;
        let _ = writeln!(
            s,
            "{k},{},{},{},{},{},{},{}",
            num(t.x),
            num(t.y),
            num(t.z),
            num(sign * q.w),
            num(sign * q.i),
            num(sign * q.j),
            num(sign * q.k)
        );
    }
    ctx.write("fk_frames.csv", &s)?;
    ctx.write("polyline.csv", &polyline_csv(&dh_to_polyline(&chain)?))?;
    Ok(())
}

fn cmd_grow(
    ctx: &Ctx,
    chain_args: &ChainArgs,
    scene: Option<&PathBuf>,
    steps: usize,
    sample_step: f64,
) -> Result<(), CliError> {
    if steps == 0 {
        return Err(CliError::Parse("--steps must be at least 1".into()));
    }
    let chain = ctx.chain(chain_args)?;
    let scene = match scene.or(ctx.project.scene_file.as_ref()) {
        Some(p) => {
            let text = read_text(p)?;
            let sc: ObstacleScene = serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            sc.validate()?;
            Some(sc)
        }
        None => None,
    };
    let total = chain.total_length();
    let mut s = String::from("everted_mm,tip_x_mm,tip_y_mm,tip_z_mm,clearance_mm\n");
    for k in 0..=steps {
        let everted = if k == steps {
            total
        } else {
            total * k as f64 / steps as f64
        };
        let state = GrowthState::new(chain.clone(), everted)?;
        let tip = tip_pose_at(&state)?.translation;
        let c = match &scene {
            Some(sc) => clearance(&state, sc, sample_step)?.value().map(num),
            None => None,
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            num(everted),
            num(tip.x),
            num(tip.y),
            num(tip.z),
            c.unwrap_or_default()
        );
    }
    ctx.write("growth_trace.csv", &s)?;
    Ok(())
}

fn measured_json(ctx: &Ctx, m: &MeasuredDH) -> Value {
    let u = ctx.units.suffix();
    let joints: Vec<Value> = m
        .thetas
        .iter()
        .enumerate()
        .map(|(k, t)| json!({"index": k + 2, format!("theta_{u}"): ctx.angle(*t)}))
        .collect();
    let twists: Vec<Value> = m
        .alphas
        .iter()
        .enumerate()
        .map(|(k, a)| json!({"link": k + 2, format!("alpha_{u}"): ctx.angle(*a)}))
        .collect();
    let links: Vec<Value> = m
        .lengths
        .iter()
        .enumerate()
        .map(|(k, a)| json!({"link": k + 1, "a_mm": a}))
        .collect();
    json!({"phase": m.phase, "joints": joints, "twists": twists, "links": links})
}

fn cmd_measure(
    ctx: &Ctx,
    chain_args: &ChainArgs,
    markers: Option<&PathBuf>,
    phase: Option<Phase>,
) -> Result<(), CliError> {
    let path = required(markers, ctx.project.markers_file.as_ref(), "markers")?;
    let target = ctx.chain(chain_args)?;
    let records = read_marker_csv(read_text(&path)?.as_bytes())?;
    let phase = phase.or(ctx.project.phase).unwrap_or(Phase::Pre);
    let measured = recover_dh(&records, phase)?;
    let rows = dh_errors(&measured, &target)?;

    let mut s = String::from("parameter,joint_or_link_index,target,measured,error,phase\n");
    let (mut worst_angle, mut worst_len) = (0.0f64, 0.0f64);
    for r in &rows {
        // error rows carry angles in degrees
        let conv = |x: f64| match (r.parameter, ctx.units) {
            (DhParameter::Length, _) | (_, AngleUnits::Deg) => x,
            (_, AngleUnits::Rad) => x.to_radians(),
        };
        match r.parameter {
            DhParameter::Length => worst_len = worst_len.max(r.error.abs()),
            _ => worst_angle = worst_angle.max(r.error.abs()),
        }
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.parameter,
            r.joint_or_link_index,
            num(conv(r.target)),
            num(conv(r.measured)),
            num(conv(r.error)),
            r.phase
        );
    }
    println!(
        "max |angle error| {} {}, max |length error| {} mm",
        num(ctx.angle(worst_angle.to_radians())),
        ctx.units,
        num(worst_len)
    );
    ctx.write("measured_dh.json", &to_json(&measured_json(ctx, &measured))?)?;
    ctx.write("errors.csv", &s)?;
    Ok(())
}

fn cmd_analyze(
    ctx: &Ctx,
    samples: Option<&PathBuf>,
    trials: Option<&PathBuf>,
) -> Result<(), CliError> {
    let samples = samples.or(ctx.project.samples_file.as_ref());
    let trials = trials.or(ctx.project.trials_file.as_ref());
    if samples.is_none() && trials.is_none() {
        return Err(CliError::MissingData("no samples or trials file given".into()));
    }
    let mut report = serde_json::Map::new();
    if let Some(p) = samples {
        let table = SampleTable::read_csv(read_text(p)?.as_bytes())?;
        if table.rows.is_empty() {
            return Err(CliError::MissingData(format!("{}: no rows", p.display())));
        }
        report.insert("measurements".into(), serde_json::to_value(analyze(&table)?)?);
    }
    if let Some(p) = trials {
        let rows = read_trials_csv(read_text(p)?.as_bytes())?;
        if rows.is_empty() {
            return Err(CliError::MissingData(format!("{}: no rows", p.display())));
        }
        let length = ctx.project.resolve_chain(None).ok().map(|c| c.total_length());
        report.insert(
            "growth_trials".into(),
            serde_json::to_value(summarize_trials(&rows, length)?)?,
        );
    }
    ctx.write("report.json", &to_json(&Value::Object(report))?)?;
    Ok(())
}

/// A realized robot: the target with Gaussian fabrication error on every
/// interior joint angle, twist and link length.
fn perturbed(
    target: &DHChain,
    angle_sd: f64,
    length_sd: f64,
    rng: &mut StdRng,
) -> Result<DHChain, CliError> {
    let ang = Normal::new(0.0, angle_sd).map_err(|e| CliError::Parse(e.to_string()))?;
    let len = Normal::new(0.0, length_sd).map_err(|e| CliError::Parse(e.to_string()))?;
    let n = target.len();
    let links = target
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let theta = if i == 0 || l.theta == 0.0 {
                l.theta
            } else {
                wrap_angle(l.theta + ang.sample(rng))
            };
            let alpha = if i == 0 || i + 1 == n {
                l.alpha
            } else {
                wrap_angle(l.alpha + ang.sample(rng))
            };
            DHLink::new((l.a + len.sample(rng)).max(1.0), alpha, theta)
        })
        .collect();
    Ok(DHChain::new(links, target.radius)?)
}

fn method_spread(method: Method) -> (f64, f64) {
    // (angle sd in rad, length sd in mm)
    match method {
        Method::Tape => (2.0f64.to_radians(), 2.0),
        Method::Weld => (1.0f64.to_radians(), 1.0),
        Method::Loop => (0.5f64.to_radians(), 0.6),
    }
}

fn cmd_synth(
    ctx: &Ctx,
    kind: SynthKind,
    chain_args: &ChainArgs,
    position_sigma: f64,
    samples: usize,
    perturb: bool,
) -> Result<(), CliError> {
    let target = ctx.chain(chain_args)?;
    let mut rng = ctx.rng();
    let opts = SyntheticOptions {
        samples,
        position_sigma,
        ..Default::default()
    };
    match kind {
        SynthKind::Markers => {
            let robot = if perturb {
                perturbed(&target, 1.0f64.to_radians(), 1.0, &mut rng)?
            } else {
                target
            };
            let records = synthetic_markers(&robot, &opts, &mut rng)?;
            let mut buf = Vec::new();
            write_marker_csv(&mut buf, &records)?;
            ctx.write("markers.csv", &String::from_utf8(buf).expect("csv is utf-8"))?;
        }
        SynthKind::Samples => {
            let mut table = SampleTable::default();
            for (method, material) in COMBINATIONS {
                let (angle_sd, length_sd) = method_spread(method);
                for r in 1..=3 {
                    let robot_id = format!("{method}-{material}-{r}");
                    let built = perturbed(&target, angle_sd, length_sd, &mut rng)?;
                    for phase in [Phase::Pre, Phase::Post] {
                        // repeated growth loosens joints slightly
                        let robot = match phase {
                            Phase::Pre => built.clone(),
                            Phase::Post => perturbed(&built, angle_sd / 4.0, length_sd / 4.0, &mut rng)?,
                        };
                        let records = synthetic_markers(&robot, &opts, &mut rng)?;
                        let m = recover_dh(&records, phase)?;
                        let mut push = |parameter, value: f64| {
                            table.rows.push(Sample {
                                value: crate::cli::round_sig(value),
                                method,
                                material,
                                phase,
                                parameter,
                                robot_id: robot_id.clone(),
                            })
                        };
                        m.alphas.iter().for_each(|a| push(DhParameter::Twist, a.to_degrees()));
                        m.thetas.iter().for_each(|t| push(DhParameter::Joint, t.to_degrees()));
                        m.lengths.iter().for_each(|a| push(DhParameter::Length, *a));
                    }
                }
            }
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            ctx.write("samples.csv", &String::from_utf8(buf).expect("csv is utf-8"))?;
        }
        SynthKind::Trials => {
            let total = target.total_length();
            let trials = staircase_trials(total, &mut rng)?;
            let mut buf = Vec::new();
            write_trials_csv(&trials, &mut buf)?;
            ctx.write("trials.csv", &String::from_utf8(buf).expect("csv is utf-8"))?;
        }
    }
    Ok(())
}

/// Pressure staircase per robot: step down after a success, up after a
/// failure, until the robot has fifteen successful growths.
fn staircase_trials(everted_mm: f64, rng: &mut StdRng) -> Result<Vec<GrowthTrial>, CliError> {
    let noise = Normal::new(0.0, 0.7).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut out = Vec::new();
    for (method, material) in COMBINATIONS {
        // (start pressure, mean minimum growth pressure) in kPa
        let (start, threshold) = match (method, material) {
            (Method::Tape, Material::Ldpe) => (6.89, 10.5),
            (Method::Tape, Material::Fabric) => (6.89, 12.5),
            (Method::Weld, _) => (20.68, 15.0),
            (Method::Loop, Material::Ldpe) => (20.68, 17.0),
            (Method::Loop, Material::Fabric) => (20.68, 21.5),
        };
        for r in 1..=2 {
            let robot_id = format!("{method}-{material}-{r}");
            let robot_threshold = threshold + noise.sample(rng);
            let mut pressure: f64 = start;
            let (mut successes, mut trial) = (0, 0);
            while successes < SUCCESSES_PER_ROBOT {
                trial += 1;
                let margin = pressure - (robot_threshold + 0.5 * noise.sample(rng));
                let success = margin > 0.0;
                let growth_time_s = success.then(|| {
                    let speed_mm_s = (35.0 + 25.0 * margin).min(100.0);
                    crate::cli::round_sig(everted_mm / speed_mm_s)
                });
                out.push(GrowthTrial {
                    method,
                    material,
                    robot_id: robot_id.clone(),
                    trial,
                    pressure_kpa: crate::cli::round_sig(pressure),
                    growth_time_s,
                    success,
                });
                if success {
                    successes += 1;
                    pressure -= PRESSURE_STEP_KPA;
                } else {
                    pressure += PRESSURE_STEP_KPA;
                }
            }
        }
    }
    Ok(out)
}
