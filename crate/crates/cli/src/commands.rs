use std::fs;

use finescale_core::energy::{
    additive_energy_bruteforce, energy_table, first_terms, ordered_pair_count, thm1_count,
    GammaRule, Thm1Config,
};
use finescale_core::experiments::{
    check_hypotheses, fit_exponent, ppc_sweep, verdict_from_tables, HypothesisParams, JmaxRule,
    Theorem,
};
use finescale_core::moments::{
    indicator_expectation, selberg_expectation, variance_estimate, AlphaPlan, MomentConfig,
    MomentReport,
};
use finescale_core::mu::MuSampler;
use finescale_core::selberg::{build_selberg, verify_sandwich, Sign};
use finescale_core::sequences::{ComponentSpec, VectorSequenceSpec};
use finescale_core::statistics::{pair_correlation_for, AlphaVector};
use serde_json::{json, Map, Value};

use crate::args::{
    Command, Common, EnergyArgs, GammaRuleArg, MethodArg, MomentArgs, SignArg, Smoothing,
};
use crate::report::{CsvTable, Failure, Outcome};
use crate::table::read_table;

pub const PRESETS: &[(&str, &str)] = &[
    ("ap3", include_str!("../presets/ap3.json")),
    (
        "lacunary-lacunary",
        include_str!("../presets/lacunary-lacunary.json"),
    ),
    (
        "lacunary-quadratic",
        include_str!("../presets/lacunary-quadratic.json"),
    ),
    (
        "lacunary-quadratic-convex",
        include_str!("../presets/lacunary-quadratic-convex.json"),
    ),
    ("power-pair", include_str!("../presets/power-pair.json")),
];

const DEFAULT_PPC_S: [f64; 3] = [0.5, 1.0, 2.0];
const DEFAULT_SAMPLES: usize = 200;
const DEFAULT_SWEEP_DRAWS: usize = 20;
const DEFAULT_MU_SAMPLES: usize = 1000;

/// Runs one subcommand, recording its effective inputs in `params`.
pub struct Runner<'a> {
    pub common: &'a Common,
    pub params: Map<String, Value>,
}

impl<'a> Runner<'a> {
    pub fn new(common: &'a Common) -> Self {
        Self {
            common,
            params: Map::new(),
        }
    }

    fn record(&mut self, key: &str, value: impl serde::Serialize) {
        self.params.insert(
            key.into(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    fn spec(&mut self) -> Result<VectorSequenceSpec, Failure> {
        let c = self.common;
        let (text, source) = match (&c.spec, &c.preset) {
            (Some(path), _) => (
                fs::read_to_string(path)
                    .map_err(|e| Failure::usage("Io", format!("{}: {e}", path.display())))?,
                path.display().to_string(),
            ),
            (None, Some(name)) => {
                let (_, text) = PRESETS.iter().find(|(n, _)| n == name).ok_or_else(|| {
                    let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
                    Failure::usage(
                        "UnknownPreset",
                        format!("{name}; known: {}", names.join(", ")),
                    )
                })?;
                (text.to_string(), format!("preset:{name}"))
            }
            (None, None) => {
                return Err(Failure::usage(
                    "MissingSpec",
                    "--spec or --preset is required",
                ))
            }
        };
        let mut spec: VectorSequenceSpec = serde_json::from_str(&text)
            .map_err(|e| Failure::usage("InvalidSpec", format!("{source}: {e}")))?;
        if let Some(n) = c.n {
            spec.n = n;
        }
        spec.validate()?;
        self.record("spec_source", &source);
        self.record("spec", &spec);
        Ok(spec)
    }

    fn s_values(&mut self, default: &[f64]) -> Vec<f64> {
        let s = if self.common.s.is_empty() {
            default.to_vec()
        } else {
            self.common.s.clone()
        };
        self.record("s", &s);
        s
    }

    fn gamma(&mut self) -> f64 {
        let g = self.common.gamma.unwrap_or(1.0);
        self.record("gamma", g);
        g
    }

    fn samples(&mut self, default: usize) -> usize {
        let n = self.common.samples.unwrap_or(default);
        self.record("samples", n);
        n
    }

    pub fn run(&mut self, command: &Command) -> Result<Outcome, Failure> {
        match command {
            Command::Materialize => self.materialize(),
            Command::Paircorr { alpha, draw } => self.paircorr(alpha, *draw),
            Command::Energy { energy, method } => self.energy(energy, *method),
            Command::Thm1Count { jmax, budget } => self.thm1(*jmax, *budget),
            Command::SelbergCheck {
                delta,
                k,
                grid_size,
            } => self.selberg_check(*delta, *k, *grid_size),
            Command::MuSample { r, start } => self.mu_sample(*r, *start),
            Command::Expectation { smoothing, moment } => self.moment(Some(*smoothing), moment),
            Command::Variance { moment } => self.moment(None, moment),
            Command::Slope { table, energy } => self.slope(table.as_deref(), energy),
            Command::Verify {
                theorem,
                r,
                table,
                grid,
                delta_margin,
                eta,
                delta,
                jmax,
            } => {
                let mut params = HypothesisParams::default();
                if let Some(m) = delta_margin {
                    params.delta_margin = *m;
                }
                if let Some(e) = eta {
                    params.eta = *e;
                }
                if let Some(d) = delta {
                    params.delta = *d;
                }
                if let Some(j) = jmax {
                    params.jmax = JmaxRule::Fixed(*j);
                }
                self.verify(*theorem, *r, table, grid, params)
            }
            Command::Sweep { grid } => self.sweep(grid),
        }
    }

    fn materialize(&mut self) -> Result<Outcome, Failure> {
        let spec = self.spec()?;
        let comps = spec.materialize()?;
        let mut header = vec!["n".to_string()];
        header.extend((1..=spec.r).map(|i| format!("a_{i}")));
        let mut table = CsvTable {
            header,
            rows: Vec::new(),
        };
        for n in 0..=spec.n {
            let mut row = vec![n.to_string()];
            row.extend(comps.iter().map(|c| c.values[n].to_string()));
            table.push(row);
        }
        Ok(
            Outcome::json(&json!({ "N": spec.n, "r": spec.r, "components": comps }))?
                .with_csv(table),
        )
    }

    fn paircorr(&mut self, alpha: &[f64], draw: u64) -> Result<Outcome, Failure> {
        let spec = self.spec()?;
        let s = self.s_values(&DEFAULT_PPC_S);
        let report = if alpha.is_empty() {
            self.record("draw", draw);
            let a = MuSampler::new(self.common.seed).alpha_at(draw, spec.r);
            let mut rep = pair_correlation_for(&spec, &a, &s)?;
            rep.seed = Some(self.common.seed);
            rep.draw = Some(draw);
            rep
        } else {
            self.record("alpha", alpha);
            pair_correlation_for(&spec, &AlphaVector::new(alpha.to_vec()), &s)?
        };
        Outcome::json(&report)
    }

    fn component(
        &mut self,
        spec: &VectorSequenceSpec,
        index: usize,
    ) -> Result<ComponentSpec, Failure> {
        self.record("component", index);
        spec.components.get(index).cloned().ok_or_else(|| {
            Failure::usage(
                "InvalidComponent",
                format!("component {index} of {}", spec.r),
            )
        })
    }

    fn gamma_rule(&mut self, arg: GammaRuleArg) -> GammaRule {
        match arg {
            GammaRuleArg::Constant => GammaRule::Constant(self.gamma()),
            GammaRuleArg::InverseN => {
                self.record("gamma_rule", "inverse_n");
                GammaRule::InverseN
            }
        }
    }

    fn energy(&mut self, args: &EnergyArgs, method: MethodArg) -> Result<Outcome, Failure> {
        let spec = self.spec()?;
        let comp = self.component(&spec, args.component)?;
        let rule = self.gamma_rule(args.gamma_rule);
        let grid = if args.grid.is_empty() {
            vec![spec.n]
        } else {
            args.grid.clone()
        };
        self.record("grid", &grid);
        self.record(
            "method",
            if method == MethodArg::Fast {
                "fast"
            } else {
                "brute"
            },
        );
        let mut reports = match method {
            MethodArg::Fast => energy_table(&comp, &grid, rule)?,
            MethodArg::Brute => grid
                .iter()
                .map(|&n| additive_energy_bruteforce(&first_terms(&comp, n)?, rule.at(n)))
                .collect::<Result<_, _>>()?,
        };
        for r in &mut reports {
            r.component_index = args.component;
        }
        let mut table = CsvTable::new(&["N", "gamma", "count"]);
        for r in &reports {
            table.push(vec![
                r.n.to_string(),
                r.gamma.to_string(),
                r.count.to_string(),
            ]);
        }
        let out = if args.grid.is_empty() {
            Outcome::json(&reports[0])?
        } else {
            Outcome::json(&reports)?
        };
        Ok(out.with_csv(table))
    }

    fn thm1(&mut self, jmax: Option<u64>, budget: Option<u128>) -> Result<Outcome, Failure> {
        let spec = self.spec()?;
        let jmax = jmax.unwrap_or_else(|| JmaxRule::LatticeScale.at(spec.n, spec.r));
        let mut config = Thm1Config::new(jmax);
        if let Some(b) = budget {
            config.budget = b;
        }
        self.record("jmax", jmax);
        self.record("budget", config.budget.to_string());
        let count = thm1_count(&spec, &config)?;
        let pairs = ordered_pair_count(&spec);
        Outcome::json(&json!({
            "N": spec.n,
            "r": spec.r,
            "jmax": jmax,
            "count": count,
            "ordered_pairs": pairs as u64,
            "diagonal_lower_bound": (pairs as u64).saturating_mul(jmax),
        }))
    }

    fn selberg_check(
        &mut self,
        delta: Option<f64>,
        k: usize,
        grid_size: usize,
    ) -> Result<Outcome, Failure> {
        let s = self.s_values(&[1.0])[0];
        let delta = match delta {
            Some(d) => d,
            None => self.spec()?.normalizer(),
        };
        self.record("delta", delta);
        self.record("K", k);
        self.record("grid_size", grid_size);
        let plus = build_selberg(s, delta, k, Sign::Plus)?;
        let minus = build_selberg(s, delta, k, Sign::Minus)?;
        let report = verify_sandwich(&minus, &plus, grid_size)?;
        let mut table = CsvTable::new(&["sign", "j", "re", "im"]);
        for (name, p) in [("plus", &plus), ("minus", &minus)] {
            for (j, (re, im)) in p.coeffs.iter().enumerate() {
                table.push(vec![
                    name.into(),
                    j.to_string(),
                    re.to_string(),
                    im.to_string(),
                ]);
            }
        }
        let pass = report.pass;
        Ok(
            Outcome::json(&json!({ "check": report, "plus": plus, "minus": minus }))?
                .with_csv(table)
                .check(pass, "sandwich inequality violated"),
        )
    }

    fn mu_sample(&mut self, r: usize, start: u64) -> Result<Outcome, Failure> {
        if r == 0 {
            return Err(Failure::usage("InvalidR", "r must be at least 1"));
        }
        let n = self.samples(DEFAULT_MU_SAMPLES);
        self.record("r", r);
        self.record("start", start);
        let sampler = MuSampler::new(self.common.seed);
        let draws: Vec<Vec<f64>> = (0..n as u64)
            .map(|k| sampler.alpha_at(start + k, r).coords)
            .collect();
        let mut header = vec!["draw".to_string()];
        header.extend((1..=r).map(|i| format!("alpha_{i}")));
        let mut table = CsvTable {
            header,
            rows: Vec::new(),
        };
        for (k, d) in draws.iter().enumerate() {
            let mut row = vec![(start + k as u64).to_string()];
            row.extend(d.iter().map(f64::to_string));
            table.push(row);
        }
        Ok(Outcome::json(
            &json!({ "seed": self.common.seed, "start": start, "r": r, "draws": draws }),
        )?
        .with_csv(table))
    }

    fn moment(
        &mut self,
        smoothing: Option<Smoothing>,
        args: &MomentArgs,
    ) -> Result<Outcome, Failure> {
        let spec = self.spec()?;
        let s_grid = self.s_values(&[1.0]);
        let plan = if args.quadrature {
            self.record("quadrature_nodes", args.nodes);
            match AlphaPlan::default_quadrature() {
                AlphaPlan::Quadrature { half_width, .. } => AlphaPlan::Quadrature {
                    half_width,
                    nodes: args.nodes,
                },
                other => other,
            }
        } else {
            AlphaPlan::sampled(self.common.seed, self.samples(DEFAULT_SAMPLES))
        };
        let config = MomentConfig {
            sign: if args.sign == SignArg::Plus {
                Sign::Plus
            } else {
                Sign::Minus
            },
            ..MomentConfig::default()
        };
        if smoothing != Some(Smoothing::Indicator) {
            self.record("t", args.t);
            self.record("sign", config.sign);
        }
        self.record(
            "smoothing",
            match smoothing {
                Some(Smoothing::Indicator) => "indicator",
                _ => "selberg",
            },
        );
        let reports: Vec<MomentReport> = s_grid
            .iter()
            .map(|&s| match smoothing {
                Some(Smoothing::Indicator) => indicator_expectation(&spec, s, &plan),
                Some(Smoothing::Selberg) => selberg_expectation(&spec, s, args.t, &plan, &config),
                None => variance_estimate(&spec, s, args.t, &plan, &config),
            })
            .collect::<Result<_, _>>()?;
        Outcome::json(&reports)
    }

    fn energy_tables(
        &mut self,
        spec: &VectorSequenceSpec,
        components: &[usize],
        grid: &[usize],
        rule: GammaRule,
    ) -> Result<Vec<Vec<(f64, f64)>>, Failure> {
        components
            .iter()
            .map(|&i| {
                Ok(energy_table(&spec.components[i], grid, rule)?
                    .iter()
                    .map(|e| (e.n as f64, e.count as f64))
                    .collect())
            })
            .collect()
    }

    fn slope(
        &mut self,
        table: Option<&std::path::Path>,
        args: &EnergyArgs,
    ) -> Result<Outcome, Failure> {
        let rows = match table {
            Some(path) => {
                self.record("table", path.display().to_string());
                read_table(path)?
            }
            None => {
                let spec = self.spec()?;
                self.component(&spec, args.component)?;
                let rule = self.gamma_rule(args.gamma_rule);
                self.record("grid", &args.grid);
                self.energy_tables(&spec, &[args.component], &args.grid, rule)?
                    .remove(0)
            }
        };
        let fit = fit_exponent(&rows)?;
        Outcome::json(&json!({ "fit": fit, "table": rows }))
    }

    fn verify(
        &mut self,
        theorem: u8,
        r: Option<usize>,
        tables: &[std::path::PathBuf],
        grid: &[usize],
        params: HypothesisParams,
    ) -> Result<Outcome, Failure> {
        let th = Theorem::from_number(theorem).ok_or_else(|| {
            Failure::usage(
                "InvalidTheorem",
                format!("theorem must be 1, 2 or 3, got {theorem}"),
            )
        })?;
        self.record("theorem", theorem);
        self.record(
            "hypothesis_params",
            json!({
                "delta_margin": params.delta_margin,
                "eta": params.eta,
                "delta": params.delta,
                "jmax": params.jmax,
                "thm1_budget": params.thm1_budget.to_string(),
            }),
        );
        let verdict = if tables.is_empty() {
            let spec = self.spec()?;
            if let Some(r) = r {
                if r != spec.r {
                    return Err(Failure::usage(
                        "InvalidR",
                        format!("--r {r} but the spec has r = {}", spec.r),
                    ));
                }
            }
            self.record("grid", grid);
            check_hypotheses(&spec, th, grid, &params)?
        } else {
            let r = r.ok_or_else(|| Failure::usage("MissingR", "--r is required with --table"))?;
            self.record("r", r);
            self.record(
                "table",
                tables
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>(),
            );
            let rows: Vec<Vec<(f64, f64)>> = tables
                .iter()
                .map(|p| read_table(p))
                .collect::<Result<_, _>>()?;
            verdict_from_tables(th, r, &rows, &params)?
        };
        let pass = verdict.pass;
        Ok(Outcome::json(&verdict)?.check(pass, "growth exceeds the theorem's threshold"))
    }

    fn sweep(&mut self, grid: &[usize]) -> Result<Outcome, Failure> {
        let spec = self.spec()?;
        let grid = if grid.is_empty() {
            vec![spec.n]
        } else {
            grid.to_vec()
        };
        self.record("grid", &grid);
        let s = self.s_values(&DEFAULT_PPC_S);
        let draws = self.samples(DEFAULT_SWEEP_DRAWS);
        let result = ppc_sweep(&spec, &grid, &s, draws, &MuSampler::new(self.common.seed))?;
        Outcome::json(&result)
    }
}
