//! Command-line front end: single evaluations, sweeps, finders, Monte-Carlo
//! validation, decoy-fraction feasibility, and the canned figure tables.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cvmdi::emit::{self, format_sig9, to_pretty};
use cvmdi::figures;
use cvmdi::find::{self, CrossingVariable, FindTarget};
use cvmdi::mc;
use cvmdi::scenario::{Scenario, SchemeKind};
use cvmdi::sweep::{run_sweep, SweepSpec, SweepVariable};
use cvmdi::CliError;
use cvmdi_core::decoy::{decoy_feasibility, sample_labels, DecoyPlan};
use cvmdi_core::{DetectorModel, LinkBudget, ModulationScheme};

/// Asymptotic key rates for relay-based CV-QKD with four-state or Gaussian
/// modulation.
#[derive(Parser)]
#[command(name = "cvmdi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Scenario selection shared by the evaluating subcommands. Values come from
/// `--config` (a JSON scenario document) when given, defaults otherwise, and
/// individual flags override either.
#[derive(Args, Debug)]
struct ScenarioArgs {
    /// JSON file with a full scenario description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Modulation family; resets V_M to its family default (0.4 four-state,
    /// 40 gaussian) unless --vmod is also given.
    #[arg(long, value_enum)]
    scheme: Option<SchemeKind>,
    /// Modulation variance V_M.
    #[arg(long)]
    vmod: Option<f64>,
    /// Alice-relay fiber length in km.
    #[arg(long)]
    lac: Option<f64>,
    /// Bob-relay fiber length in km.
    #[arg(long)]
    lbc: Option<f64>,
    /// Fiber loss in dB/km.
    #[arg(long)]
    loss: Option<f64>,
    /// Excess noise on the Alice-relay link.
    #[arg(long)]
    eps_a: Option<f64>,
    /// Excess noise on the Bob-relay link.
    #[arg(long)]
    eps_b: Option<f64>,
    /// Reconciliation efficiency in [0, 1].
    #[arg(long)]
    beta: Option<f64>,
    /// Homodyne detector efficiency.
    #[arg(long)]
    eta_hom: Option<f64>,
    /// Electronic noise of the homodyne detector.
    #[arg(long)]
    v_el: Option<f64>,
    /// Free-form scenario label carried into reports.
    #[arg(long)]
    label: Option<String>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<Scenario, CliError> {
        let mut s = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                serde_json::from_str::<Scenario>(&text)?
            }
            None => Scenario::dm_default(),
        };
        if let Some(kind) = self.scheme {
            let v_mod = self.vmod.unwrap_or(match kind {
                SchemeKind::FourState => 0.4,
                SchemeKind::Gaussian => 40.0,
            });
            s.scheme = match kind {
                SchemeKind::FourState => ModulationScheme::four_state_from_vmod(v_mod)?,
                SchemeKind::Gaussian => ModulationScheme::gaussian(v_mod)?,
            };
        } else if let Some(v_mod) = self.vmod {
            s.scheme = s.scheme.with_v_mod(v_mod)?;
        }
        s.link = LinkBudget::new(
            self.lac.unwrap_or(s.link.l_ac),
            self.lbc.unwrap_or(s.link.l_bc),
            self.loss.unwrap_or(s.link.loss_db_per_km),
            self.eps_a.unwrap_or(s.link.eps_a),
            self.eps_b.unwrap_or(s.link.eps_b),
        )?;
        s.detector = DetectorModel::new(
            self.eta_hom.unwrap_or(s.detector.eta_hom),
            self.v_el.unwrap_or(s.detector.v_el),
        )?;
        if let Some(beta) = self.beta {
            s.beta = beta;
        }
        if let Some(label) = &self.label {
            s.label = label.clone();
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum LabelFormat {
    Csv,
    Binary,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario and print the rate quantities.
    Keyrate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Print the versioned JSON report instead of the human summary.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a scenario along a parameter grid; CSV by default.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Parameter to vary.
        #[arg(long, value_enum)]
        var: SweepVariable,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        /// Grid points, endpoints included.
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Geometric spacing (needs lo > 0).
        #[arg(long)]
        log: bool,
        /// Emit a JSON document instead of CSV.
        #[arg(long)]
        json: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate an optimum, threshold, or scheme crossing.
    Find {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum)]
        target: FindTarget,
        /// Gaussian modulation variance for crossing targets.
        #[arg(long, default_value_t = 40.0)]
        gm_vmod: f64,
        /// V_M bracket for optimal-vm.
        #[arg(long, default_value_t = 0.05)]
        bracket_lo: f64,
        #[arg(long, default_value_t = 1.5)]
        bracket_hi: f64,
    },
    /// Simulate the protocol and compare the measured covariance against the
    /// analytic reduction.
    McValidate {
        /// Four-state modulation variance.
        #[arg(long, default_value_t = 0.4)]
        vmod: f64,
        #[arg(long, default_value_t = 20.0)]
        lac: f64,
        #[arg(long, default_value_t = 0.0)]
        lbc: f64,
        #[arg(long, default_value_t = 0.2)]
        loss: f64,
        #[arg(long, default_value_t = 0.002)]
        eps_a: f64,
        #[arg(long, default_value_t = 0.002)]
        eps_b: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Give Bob's source the four-state correlation instead of the
        /// Gaussian one and judge the measured b-entry gap against its
        /// prediction.
        #[arg(long)]
        discrepancy: bool,
        /// Also write the per-pulse record as CSV.
        #[arg(long)]
        dump_samples: Option<PathBuf>,
    },
    /// Decoy-fraction feasibility of the four-state source and the
    /// throughput cost of carving out decoy and estimation pulses.
    Decoy {
        #[arg(long, default_value_t = 0.2)]
        alpha_sq: f64,
        /// Thermal mean photon number of the decoy state; defaults to
        /// alpha_sq so the decoy matches the signal energy.
        #[arg(long)]
        nbar: Option<f64>,
        /// Fock-space cutoff for the feasibility search.
        #[arg(long, default_value_t = 40)]
        cutoff: usize,
        /// Requested decoy weight within the non-estimation pulses.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Fraction of pulses diverted to parameter estimation.
        #[arg(long, default_value_t = 0.1)]
        p_est: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20.0)]
        lac: f64,
        /// Excess noise applied to both links.
        #[arg(long, default_value_t = 0.002)]
        eps: f64,
        #[arg(long, default_value_t = 0.9)]
        beta: f64,
        /// Sample this many pulse labels.
        #[arg(long, requires = "labels_out")]
        labels: Option<usize>,
        /// Where to write the sampled labels.
        #[arg(long)]
        labels_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = LabelFormat::Csv)]
        labels_format: LabelFormat,
    },
    /// Write the three canned study tables (fig3/fig4/fig5.csv).
    Figures {
        #[arg(long, default_value = "data")]
        out_dir: PathBuf,
    },
}

/// Writes to stdout, exiting quietly once the reading end has gone away
/// (piping into `head` must not panic).
fn out(text: &str) {
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(text.as_bytes()).is_err() || stdout.flush().is_err() {
        process::exit(0);
    }
}

fn out_line(text: &str) {
    out(text);
    out("\n");
}

fn print_human(scenario: &Scenario, report: &cvmdi_core::KeyRateReport) {
    let scheme = match scenario.scheme {
        ModulationScheme::FourState { alpha_sq } => {
            format!("four-state, alpha^2 = {}, V_M = {}", alpha_sq, 2.0 * alpha_sq)
        }
        ModulationScheme::Gaussian { v_mod } => format!("gaussian, V_M = {v_mod}"),
    };
    out_line(&format!("scheme      {scheme}"));
    out_line(&format!(
        "link        A {} km, B {} km at {} dB/km; excess noise {} / {}",
        scenario.link.l_ac,
        scenario.link.l_bc,
        scenario.link.loss_db_per_km,
        scenario.link.eps_a,
        scenario.link.eps_b
    ));
    out_line(&format!(
        "detector    eta_hom = {}, v_el = {}",
        scenario.detector.eta_hom, scenario.detector.v_el
    ));
    out_line(&format!("beta        {}", scenario.beta));
    out_line(&format!("i_ab        {}", format_sig9(report.i_ab)));
    out_line(&format!("chi_be      {}", format_sig9(report.chi_be)));
    out_line(&format!(
        "kappa       {}, {}, {}",
        format_sig9(report.kappa[0]),
        format_sig9(report.kappa[1]),
        format_sig9(report.kappa[2])
    ));
    out_line(&format!("plob        {}", format_sig9(report.plob)));
    out_line(&format!("key_rate    {} bits/pulse", format_sig9(report.key_rate)));
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Keyrate { scenario, json } => {
            let s = scenario.resolve()?;
            let report = s.run()?;
            if json {
                out_line(&to_pretty(&emit::report_json(&report, &s)?));
            } else {
                print_human(&s, &report);
            }
        }
        Command::Sweep { scenario, var, lo, hi, steps, log, json, out } => {
            let base = scenario.resolve()?;
            let spec = SweepSpec { variable: var, lo, hi, steps, log, base };
            let rows = run_sweep(&spec)?;
            let text = if json {
                let mut doc = to_pretty(&emit::sweep_json(var, &rows)?);
                doc.push('\n');
                doc
            } else {
                emit::sweep_csv(var, &rows)
            };
            match out {
                Some(path) => fs::write(path, text)?,
                None => out(&text),
            }
        }
        Command::Find { scenario, target, gm_vmod, bracket_lo, bracket_hi } => {
            let base = scenario.resolve()?;
            let result = match target {
                FindTarget::OptimalVm => find::find_optimal_vm(&base, bracket_lo, bracket_hi)?,
                FindTarget::MaxDistance => find::find_max_distance(&base)?,
                FindTarget::BetaThreshold => find::find_beta_threshold(&base)?,
                FindTarget::CrossingDistance => {
                    find::find_crossing(&base, gm_vmod, CrossingVariable::Distance)?
                }
                FindTarget::CrossingBeta => {
                    find::find_crossing(&base, gm_vmod, CrossingVariable::Beta)?
                }
            };
            out_line(&to_pretty(&emit::finder_json(&result)?));
        }
        Command::McValidate {
            vmod,
            lac,
            lbc,
            loss,
            eps_a,
            eps_b,
            samples,
            seed,
            discrepancy,
            dump_samples,
        } => {
            let link = LinkBudget::new(lac, lbc, loss, eps_a, eps_b)?;
            let config = mc::build_config(vmod, link, samples, seed, discrepancy)?;
            if let Some(path) = &dump_samples {
                mc::dump_samples(&config, path)?;
            }
            let report = mc::validate(&config)?;
            out_line(&to_pretty(&emit::mc_json(&report)?));
        }
        Command::Decoy {
            alpha_sq,
            nbar,
            cutoff,
            p,
            p_est,
            seed,
            lac,
            eps,
            beta,
            labels,
            labels_out,
            labels_format,
        } => {
            let nbar = nbar.unwrap_or(alpha_sq);
            let plan = DecoyPlan::new(p, p_est, alpha_sq, nbar, seed)?;
            let p_max = decoy_feasibility(alpha_sq, nbar, cutoff)?;
            let (w_key, w_decoy, w_est) = plan.weights();
            let link = LinkBudget::extreme_asymmetric(lac, eps, eps)?;
            let s = Scenario::new(
                ModulationScheme::four_state(alpha_sq)?,
                link,
                DetectorModel::ideal(),
                beta,
            )?;
            let report = s.run()?;
            let mut body = json!({
                "alpha_sq": alpha_sq,
                "nbar": nbar,
                "cutoff": cutoff,
                "p": p,
                "p_est": p_est,
                "p_max": p_max,
                "feasible": p <= p_max,
                "weights": {"key": w_key, "decoy": w_decoy, "est": w_est},
                "key_rate": report.key_rate,
                "key_rate_throughput": w_key * report.key_rate,
            });
            if let Some(n) = labels {
                let path = labels_out.as_ref().expect("clap enforces labels_out");
                let sampled = sample_labels(&plan, n)?;
                match labels_format {
                    LabelFormat::Binary => {
                        let bytes: Vec<u8> = sampled.iter().map(|l| l.as_byte()).collect();
                        fs::write(path, bytes)?;
                    }
                    LabelFormat::Csv => {
                        let mut text = String::from("label\n");
                        for l in &sampled {
                            text.push(l.as_byte() as char);
                            text.push('\n');
                        }
                        fs::write(path, text)?;
                    }
                }
                body["labels_written"] = json!(n);
                body["labels_path"] = json!(path.display().to_string());
            }
            out_line(&to_pretty(&emit::decoy_json(body)));
        }
        Command::Figures { out_dir } => {
            let paths = figures::write_figures(&out_dir)?;
            for p in paths {
                out_line(&format!("wrote {}", p.display()));
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        process::exit(e.exit_code());
    }
}
