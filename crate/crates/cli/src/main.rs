use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use fewloc::generators::{self, GeneratorError};
use fewloc::io::{self as fio, ParseError, Structure};
use fewloc::placement::{generate_locations_bounded, DEFAULT_COORDINATE_BOUND};
use fewloc::rigidity::is_infinitesimally_rigid_seeded;
use fewloc::{
    certify_placement, collision_motion_witness, minimal_cycle_counterexample, place, reduction_schedule, Complex2, ConditionMode,
    Framework, LocationSet, PlacementError, RigidityError, Strategy, Vertex,
};

#[derive(Debug, Error)]
enum CliError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Malformed(e.to_string())
    }
}

impl From<PlacementError> for CliError {
    fn from(e: PlacementError) -> Self {
        CliError::Refused(e.to_string())
    }
}

impl From<GeneratorError> for CliError {
    fn from(e: GeneratorError) -> Self {
        CliError::Refused(e.to_string())
    }
}

impl From<RigidityError> for CliError {
    fn from(e: RigidityError) -> Self {
        CliError::Refused(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Rigidity certificates and few-location placements for triangulated surfaces.
#[derive(Debug, Parser)]
#[command(name = "fewloc", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate a triangulation or a counterexample instance.
    #[command(subcommand)]
    Gen(Gen),
    /// Contract low-degree vertices and print the schedule.
    Reduce {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
        #[arg(long)]
        floor: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Place a sphere or surface into a location set.
    Place(PlaceArgs),
    /// Decide infinitesimal rigidity of a framework.
    Check {
        /// Structure file, followed by `v x y z` lines unless --points is given.
        input: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-certify a placement from scratch.
    Verify {
        placement: PathBuf,
        #[arg(long)]
        triangulation: PathBuf,
        #[arg(long)]
        locations: PathBuf,
        /// Defaults to the mode named in the placement's certificate block.
        #[arg(long)]
        mode: Option<ConditionMode>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Explicit motion of a framework with colliding apex groups.
    Witness {
        /// Structure file, followed by `v x y z` lines unless --points or --placement is given.
        input: Option<PathBuf>,
        #[arg(long)]
        apex: PathBuf,
        #[arg(long, conflicts_with = "placement")]
        points: Option<PathBuf>,
        /// Assignment file; needs --locations.
        #[arg(long, requires = "locations")]
        placement: Option<PathBuf>,
        #[arg(long)]
        locations: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Debug, Subcommand)]
enum Gen {
    /// tetrahedron, octahedron, moebius_torus or rp2_6.
    Primitive {
        name: String,
        #[command(flatten)]
        out: Out,
    },
    /// Stacked sphere on n vertices.
    Stacked {
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Sphere from random vertex splits of the tetrahedron.
    RandomSphere {
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Closed surface of genus g (crosscaps with --non-orientable).
    Genus {
        g: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        non_orientable: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Laman graph with an apex per vertex pair (or triple with --dim 3).
    LamanCx {
        /// Base graph file; a random Laman graph on --n vertices otherwise.
        #[arg(long, conflicts_with = "n")]
        base: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        apex_out: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Minimal cycle with an apex over vertex triples.
    MincycleCx {
        /// Base triangulation; the tetrahedron otherwise.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long)]
        apex_out: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Debug, Args)]
struct Out {
    /// Output file; stdout otherwise.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlaceArgs {
    /// Triangulation files; stdin if none.
    inputs: Vec<PathBuf>,
    #[arg(long)]
    strategy: Strategy,
    /// Number of generated locations.
    #[arg(long = "c", conflicts_with = "locations", required_unless_present = "locations")]
    c: Option<usize>,
    #[arg(long)]
    locations: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_COORDINATE_BOUND)]
    coordinate_bound: i64,
    #[arg(long)]
    locations_out: Option<PathBuf>,
    /// Placement file (single input only).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads for several inputs; each writes `<input>.placement`.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => Ok(fs::read_to_string(p)?),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn emit(out: &Out, text: &str) -> Result<()> {
    match &out.output {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_surface(path: Option<&Path>) -> Result<Complex2> {
    Ok(fio::parse_triangulation(&read_input(path)?)?)
}

fn gen(cmd: Gen) -> Result<()> {
    match cmd {
        Gen::Primitive { name, out } => emit(&out, &fio::write_triangulation(&generators::primitive(&name)?)),
        Gen::Stacked { n, seed, out } => emit(&out, &fio::write_triangulation(&generators::stacked_sphere(n, seed)?)),
        Gen::RandomSphere { n, seed, out } => emit(&out, &fio::write_triangulation(&generators::random_sphere(n, seed)?)),
        Gen::Genus { g, n, non_orientable, seed, out } => {
            emit(&out, &fio::write_triangulation(&generators::genus_surface(g, !non_orientable, n, seed)?))
        }
        Gen::LamanCx { base, n, dim, seed, apex_out, out } => {
            let g = match (base, n) {
                (Some(p), _) => fio::parse_graph(&read_input(Some(&p))?)?,
                (None, Some(n)) => generators::random_laman_graph(n, seed)?,
                (None, None) => return Err(CliError::Malformed("laman-cx needs --base or --n".into())),
            };
            let inst = generators::laman_counterexample(&g, dim, seed)?;
            if let Some(p) = apex_out {
                fs::write(p, fio::write_apex_index(&inst.apex_index))?;
            }
            emit(&out, &fio::write_graph(&inst.augmented))
        }
        Gen::MincycleCx { base, rounds, apex_out, out } => {
            let mu = match base {
                Some(p) => read_surface(Some(&p))?,
                None => generators::primitive("tetrahedron")?,
            };
            let inst = minimal_cycle_counterexample(&mu, rounds)?;
            if let Some(p) = apex_out {
                fs::write(p, fio::write_apex_index(&inst.apex_index))?;
            }
            emit(&out, &fio::write_triangulation(&inst.result))
        }
    }
}

fn place_one(c: &Complex2, a: &LocationSet, args: &PlaceArgs) -> Result<String> {
    let r = place(c, a, args.strategy, args.seed)?;
    let mut s = fio::write_placement(&r.assignment, &r.certificate);
    s += &format!(
        "strategy: {}\nbase_vertices: {}\nlocations_needed: {}\nmax_failures: {}\nmax_avoidance: {}\nmax_lookahead: {}\n",
        r.strategy.name(),
        r.base_vertices,
        r.locations_needed,
        r.max_failures(),
        r.max_avoidance(),
        r.max_lookahead()
    );
    Ok(s)
}

fn run_place(args: PlaceArgs) -> Result<()> {
    let a = match (&args.locations, args.c) {
        (Some(p), _) => fio::parse_locations(&read_input(Some(p))?)?,
        (None, Some(c)) => generate_locations_bounded(c, 3, args.seed, args.coordinate_bound),
        (None, None) => unreachable!("clap requires one of --c and --locations"),
    };
    if let Some(p) = &args.locations_out {
        fs::write(p, fio::write_locations(&a))?;
    }
    if args.inputs.len() <= 1 {
        let c = read_surface(args.inputs.first().map(PathBuf::as_path))?;
        let text = place_one(&c, &a, &args)?;
        return match &args.output {
            Some(p) => {
                fs::write(p, &text)?;
                let block: String = text.lines().filter(|l| l.contains(':')).map(|l| format!("{l}\n")).collect();
                io::stdout().write_all(block.as_bytes())?;
                Ok(())
            }
            None => Ok(io::stdout().write_all(text.as_bytes())?),
        };
    }
    if args.output.is_some() {
        return Err(CliError::Malformed("-o takes a single input; several inputs write <input>.placement".into()));
    }
    let jobs = args.jobs.max(1);
    let chunks: Vec<Vec<&PathBuf>> = (0..jobs).map(|j| args.inputs.iter().skip(j).step_by(jobs).collect()).collect();
    let mut results: Vec<(PathBuf, Result<()>)> = std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                let (a, args) = (&a, &args);
                s.spawn(move || {
                    chunk
                        .iter()
                        .map(|&p| {
                            let res = read_surface(Some(p)).and_then(|c| place_one(&c, a, args)).and_then(|text| {
                                let mut out = p.clone().into_os_string();
                                out.push(".placement");
                                Ok(fs::write(out, text)?)
                            });
                            (p.clone(), res)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    results.sort_by(|x, y| x.0.cmp(&y.0));
    let mut worst = None;
    for (p, r) in results {
        match r {
            Ok(()) => println!("{}: ok", p.display()),
            Err(e) => {
                println!("{}: {e}", p.display());
                worst = Some(match (worst, e) {
                    (Some(CliError::Malformed(m)), _) | (_, CliError::Malformed(m)) => CliError::Malformed(m),
                    (_, e) => e,
                });
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

fn load_framework(input: Option<&Path>, points: Option<&Path>) -> Result<(Structure, Framework)> {
    let text = read_input(input)?;
    Ok(match points {
        Some(p) => fio::framework_from_parts(&text, &read_input(Some(p))?)?,
        None => fio::parse_framework(&text)?,
    })
}

fn check(input: Option<&Path>, points: Option<&Path>, witness_out: Option<&Path>, seed: u64) -> Result<()> {
    let (_, f) = load_framework(input, points)?;
    let rep = is_infinitesimally_rigid_seeded(&f, seed)?;
    let mut s = format!(
        "rigid: {}\nrank: {}/{}\nrank_method: {:?}\ndegenerate_span: {}\n",
        rep.rigid, rep.rank, rep.required_rank, rep.certificate.method, rep.degenerate_span
    );
    if let Some(w) = &rep.witness {
        let text = fio::write_witness(w);
        match witness_out {
            Some(p) => {
                fs::write(p, text)?;
                s += &format!("witness: {}\n", p.display());
            }
            None => s += &format!("witness:\n{text}"),
        }
    }
    io::stdout().write_all(s.as_bytes())?;
    Ok(())
}

fn verify(placement: &Path, tri: &Path, locs: &Path, mode: Option<ConditionMode>, seed: u64) -> Result<()> {
    let ptext = read_input(Some(placement))?;
    let assignment = fio::parse_placement(&ptext)?;
    let mode = match mode {
        Some(m) => m,
        None => ptext
            .lines()
            .find_map(|l| l.strip_prefix("condition:"))
            .and_then(|rest| rest.split_whitespace().next())
            .map(|m| m.parse::<ConditionMode>().map_err(CliError::Malformed))
            .transpose()?
            .unwrap_or(ConditionMode::C),
    };
    let c = read_surface(Some(tri))?;
    let a = fio::parse_locations(&read_input(Some(locs))?)?;
    let cert = certify_placement(&c, &a, &assignment, mode, seed)?;
    io::stdout().write_all(fio::certificate_block(&cert).as_bytes())?;
    if !cert.rigid {
        return Err(CliError::Refused(format!("framework is flexible, rank {}/{}", cert.rank, cert.required_rank)));
    }
    if !cert.condition_ok {
        return Err(CliError::Refused(format!("condition {mode} violated")));
    }
    Ok(())
}

fn witness(
    input: Option<&Path>,
    apex: &Path,
    points: Option<&Path>,
    placement: Option<&Path>,
    locations: Option<&Path>,
    out: &Out,
) -> Result<()> {
    let index: BTreeMap<Vec<Vertex>, Vertex> = fio::parse_apex_index(&read_input(Some(apex))?)?;
    let f = match (placement, locations) {
        (Some(pl), Some(lo)) => {
            let s = fio::parse_structure(&read_input(input)?)?;
            let a = fio::parse_locations(&read_input(Some(lo))?)?;
            let assignment = fio::parse_placement(&read_input(Some(pl))?)?;
            let mut pts = BTreeMap::new();
            for (v, i) in assignment {
                let p = a.points.get(i).ok_or(PlacementError::BadIndex { index: i, size: a.len() })?;
                pts.insert(v, p.clone());
            }
            Framework::from_integer_points(s.graph(), a.dim, &pts)?
        }
        _ => load_framework(input, points)?.1,
    };
    let w = collision_motion_witness(&f, &index)?;
    emit(out, &fio::write_witness(&w))
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen(g) => gen(g),
        Cmd::Reduce { input, max_degree, floor, out } => {
            let c = read_surface(input.as_deref())?;
            if !c.surface_report().is_closed_surface {
                return Err(CliError::Refused("input is not a closed connected surface".into()));
            }
            emit(&out, &fio::write_schedule(&reduction_schedule(&c, max_degree, floor)))
        }
        Cmd::Place(args) => run_place(args),
        Cmd::Check { input, points, witness_out, seed } => check(input.as_deref(), points.as_deref(), witness_out.as_deref(), seed),
        Cmd::Verify { placement, triangulation, locations, mode, seed } => verify(&placement, &triangulation, &locations, mode, seed),
        Cmd::Witness { input, apex, points, placement, locations, out } => {
            witness(input.as_deref(), &apex, points.as_deref(), placement.as_deref(), locations.as_deref(), &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Refused(_) => 2,
                CliError::Malformed(_) | CliError::Io(_) => 1,
            })
        }
    }
}
