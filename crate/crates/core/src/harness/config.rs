//! Run-config files for simulation grids.
//!
//! ```toml
//! replications = 500        # default for every cell
//! base_seed = 1
//! selection_m = 6           # optional, otherwise ⌊n / ln n⌋
//!
//! [[method]]
//! label = "CCH1"
//! method = "cch"
//! k = 2
//! kn = 2
//! ridge = 1e-8              # optional
//!
//! [[cell]]
//! model = "M1"
//! p = 100
//! n = 20
//! rho = [0.0, 0.9]          # any of the grid keys may be an array
//! cov_family = "normal"
//! noise_family = ["normal", "t1"]
//! methods = ["CCH1"]        # optional subset of the labels above
//! replications = 100        # optional override
//! seed = 7                  # optional override of base_seed
//! m = 6                     # optional override of selection_m
//! ```
//!
//! Grid keys are `model`, `p`, `n`, `rho`, `t_mix`, `cov_family` and
//! `noise_family`; arrays expand to their cartesian product. Without any
//! `[[method]]` table the methods CCH1 (`cch`, k = 2, kn = 2), CCK1 (`cck`,
//! k = 2, kn = 2), SIS and RRCS are used.

use toml::{Table, Value};

use super::{ExperimentCell, MethodSpec};
use crate::screening::{Method, ScreeningConfig};
use crate::simgen::{SimModel, SimModelSpec};
use crate::{Family, NeighborhoodConfig, Result, ScreenError, DEFAULT_RIDGE};

const TOP_KEYS: &[&str] = &["replications", "base_seed", "selection_m", "method", "cell"];
const METHOD_KEYS: &[&str] = &["label", "method", "k", "kn", "ridge"];
const CELL_KEYS: &[&str] = &[
    "model",
    "p",
    "n",
    "rho",
    "t_mix",
    "cov_family",
    "noise_family",
    "methods",
    "replications",
    "seed",
    "m",
];

pub const DEFAULT_REPLICATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub methods: Vec<MethodSpec>,
    pub cells: Vec<ExperimentCell>,
}

struct Problems(Vec<String>);

impl Problems {
    fn push(&mut self, msg: String) {
        self.0.push(msg);
    }

    fn unknown_keys(&mut self, table: &Table, allowed: &[&str], path: &str) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.push(format!("unknown key `{path}{key}`"));
            }
        }
    }

    fn usize(&mut self, v: Option<&Value>, path: &str) -> Option<usize> {
        match v? {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            _ => {
                self.push(format!("`{path}` must be a nonnegative integer"));
                None
            }
        }
    }

    fn float(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.push(format!("`{path}` must be a number"));
                None
            }
        }
    }

    fn string<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a str> {
        match v {
            Value::String(s) => Some(s),
            _ => {
                self.push(format!("`{path}` must be a string"));
                None
            }
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, v: &Value, path: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.string(v, path)?;
        match s.parse() {
            Ok(x) => Some(x),
            Err(e) => {
                self.push(format!("`{path}`: {e}"));
                None
            }
        }
    }

    /// A scalar or an array of scalars, each converted by `conv`.
    fn axis<T>(
        &mut self,
        v: Option<&Value>,
        path: &str,
        mut conv: impl FnMut(&mut Self, &Value, &str) -> Option<T>,
    ) -> Option<Vec<Option<T>>> {
        let Some(v) = v else {
            return Some(vec![None]);
        };
        let items: Vec<&Value> = match v {
            Value::Array(a) if a.is_empty() => {
                self.push(format!("`{path}` is an empty array"));
                return None;
            }
            Value::Array(a) => a.iter().collect(),
            other => vec![other],
        };
        let out: Vec<Option<T>> = items.iter().map(|x| conv(self, x, path)).collect();
        if out.iter().any(Option::is_none) {
            return None;
        }
        Some(out.into_iter().map(|x| Some(x.unwrap())).collect())
    }

    fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(ScreenError::Config(format!(
                "invalid run config: {}",
                self.0.join("; ")
            )))
        }
    }
}

fn default_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec::new("CCH1", ScreeningConfig::cch(2, 2).expect("valid")),
        MethodSpec::new("CCK1", ScreeningConfig::cck(2, 2).expect("valid")),
        MethodSpec::new("SIS", ScreeningConfig::sis()),
        MethodSpec::new("RRCS", ScreeningConfig::rrcs()),
    ]
}

fn parse_method(t: &Table, path: &str, pr: &mut Problems) -> Option<MethodSpec> {
    pr.unknown_keys(t, METHOD_KEYS, path);
    let method: Option<Method> = match t.get("method") {
        Some(v) => pr.parsed(v, &format!("{path}method")),
        None => {
            pr.push(format!("`{path}method` is required"));
            None
        }
    };
    let label = match t.get("label") {
        Some(v) => pr.string(v, &format!("{path}label")).map(str::to_string),
        None => method.map(|m| m.to_string().to_uppercase()),
    };
    let k = pr.usize(t.get("k"), &format!("{path}k"));
    let kn = pr.usize(t.get("kn"), &format!("{path}kn"));
    let ridge = match t.get("ridge") {
        Some(v) => pr.float(v, &format!("{path}ridge"))?,
        None => DEFAULT_RIDGE,
    };
    let method = method?;
    let neighborhood = if method.uses_neighborhood() {
        match (k, kn) {
            (Some(k), Some(kn)) => match NeighborhoodConfig::new(k, kn) {
                Ok(nb) => Some(nb),
                Err(e) => {
                    pr.push(format!("`{path}`: {e}"));
                    return None;
                }
            },
            _ => {
                pr.push(format!("`{path}` method {method} needs `k` and `kn`"));
                return None;
            }
        }
    } else {
        None
    };
    match ScreeningConfig::new(method, neighborhood, ridge) {
        Ok(config) => Some(MethodSpec {
            label: label?,
            config,
        }),
        Err(e) => {
            pr.push(format!("`{path}`: {e}"));
            None
        }
    }
}

fn tables<'a>(root: &'a Table, key: &str, pr: &mut Problems) -> Vec<&'a Table> {
    match root.get(key) {
        None => vec![],
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .filter_map(|(i, v)| match v {
                Value::Table(t) => Some(t),
                _ => {
                    pr.push(format!("`{key}[{i}]` must be a table"));
                    None
                }
            })
            .collect(),
        Some(_) => {
            pr.push(format!("`{key}` must be an array of tables (`[[{key}]]`)"));
            vec![]
        }
    }
}

struct Defaults {
    replications: usize,
    base_seed: u64,
    selection_m: Option<usize>,
}

fn parse_cell(
    t: &Table,
    path: &str,
    methods: &[MethodSpec],
    defaults: &Defaults,
    pr: &mut Problems,
) -> Vec<ExperimentCell> {
    pr.unknown_keys(t, CELL_KEYS, path);
    let p = |k: &str| format!("{path}{k}");
    let models = pr.axis(t.get("model"), &p("model"), |pr, v, at| match v {
        Value::Integer(i) => format!("{i}")
            .parse::<SimModel>()
            .map_err(|e| pr.push(format!("`{at}`: {e}")))
            .ok(),
        _ => pr.parsed::<SimModel>(v, at),
    });
    let ps = pr.axis(t.get("p"), &p("p"), |pr, v, at| pr.usize(Some(v), at));
    let ns = pr.axis(t.get("n"), &p("n"), |pr, v, at| pr.usize(Some(v), at));
    let rhos = pr.axis(t.get("rho"), &p("rho"), |pr, v, at| pr.float(v, at));
    let tmixes = pr.axis(t.get("t_mix"), &p("t_mix"), |pr, v, at| pr.float(v, at));
    let covs = pr.axis(t.get("cov_family"), &p("cov_family"), |pr, v, at| {
        pr.parsed::<Family>(v, at)
    });
    let noises = pr.axis(t.get("noise_family"), &p("noise_family"), |pr, v, at| {
        pr.parsed::<Family>(v, at)
    });
    for key in ["model", "p", "n"] {
        if !t.contains_key(key) {
            pr.push(format!("`{path}{key}` is required"));
        }
    }

    let replications = match t.get("replications") {
        Some(v) => pr.usize(Some(v), &p("replications")),
        None => Some(defaults.replications),
    };
    let seed = match t.get("seed") {
        Some(Value::Integer(i)) if *i >= 0 => Some(*i as u64),
        Some(_) => {
            pr.push(format!("`{path}seed` must be a nonnegative integer"));
            None
        }
        None => Some(defaults.base_seed),
    };
    let m = match t.get("m") {
        Some(v) => pr.usize(Some(v), &p("m")).map(Some),
        None => Some(defaults.selection_m),
    };
    let chosen: Option<Vec<MethodSpec>> = match t.get("methods") {
        None => Some(methods.to_vec()),
        Some(Value::Array(labels)) => {
            let mut out = Vec::new();
            for (i, l) in labels.iter().enumerate() {
                let at = format!("{path}methods[{i}]");
                if let Some(s) = pr.string(l, &at) {
                    match methods.iter().find(|m| m.label == s) {
                        Some(m) => out.push(m.clone()),
                        None => pr.push(format!("`{at}`: unknown method label `{s}`")),
                    }
                }
            }
            Some(out)
        }
        Some(_) => {
            pr.push(format!("`{path}methods` must be an array of labels"));
            None
        }
    };

    let (Some(models), Some(ps), Some(ns), Some(rhos), Some(tmixes), Some(covs), Some(noises)) =
        (models, ps, ns, rhos, tmixes, covs, noises)
    else {
        return vec![];
    };
    let (Some(replications), Some(seed), Some(m), Some(chosen)) = (replications, seed, m, chosen)
    else {
        return vec![];
    };

    let mut cells = Vec::new();
    for model in &models {
        for pv in &ps {
            for nv in &ns {
                for rho in &rhos {
                    for t_mix in &tmixes {
                        for cov in &covs {
                            for noise in &noises {
                                let (Some(model), Some(pv), Some(nv)) = (*model, *pv, *nv) else {
                                    continue;
                                };
                                let spec = SimModelSpec {
                                    model,
                                    p: pv,
                                    n: nv,
                                    rho: *rho,
                                    t_mix: *t_mix,
                                    cov_family: *cov,
                                    noise_family: *noise,
                                };
                                let cell = ExperimentCell {
                                    spec,
                                    methods: chosen.clone(),
                                    replications,
                                    selection_m: m,
                                    base_seed: seed,
                                };
                                match cell.validate() {
                                    Ok(()) => cells.push(cell),
                                    Err(e) => pr.push(format!("`{path}`: {e}")),
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    cells
}

/// Parses a run-config document. Every problem found (unknown keys, type
/// mismatches, invalid cells) is reported in a single configuration error.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ScreenError::Config(format!("malformed run config: {e}")))?;
    let mut pr = Problems(Vec::new());
    pr.unknown_keys(&root, TOP_KEYS, "");
    let defaults = Defaults {
        replications: pr
            .usize(root.get("replications"), "replications")
            .unwrap_or(DEFAULT_REPLICATIONS),
        base_seed: match root.get("base_seed") {
            None => 0,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => {
                pr.push("`base_seed` must be a nonnegative integer".into());
                0
            }
        },
        selection_m: pr.usize(root.get("selection_m"), "selection_m"),
    };

    let method_tables = tables(&root, "method", &mut pr);
    let methods = if method_tables.is_empty() {
        default_methods()
    } else {
        let parsed: Vec<MethodSpec> = method_tables
            .iter()
            .enumerate()
            .filter_map(|(i, t)| parse_method(t, &format!("method[{i}]."), &mut pr))
            .collect();
        for (i, m) in parsed.iter().enumerate() {
            if parsed[..i].iter().any(|o| o.label == m.label) {
                pr.push(format!("duplicate method label `{}`", m.label));
            }
        }
        parsed
    };

    let cell_tables = tables(&root, "cell", &mut pr);
    let mut cells = Vec::new();
    for (i, t) in cell_tables.iter().enumerate() {
        cells.extend(parse_cell(
            t,
            &format!("cell[{i}]."),
            &methods,
            &defaults,
            &mut pr,
        ));
    }
    if cell_tables.is_empty() {
        pr.push("config declares no cells".into());
    }
    pr.finish()?;
    Ok(RunConfig { methods, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expands_cartesian_product() {
        let cfg = parse_run_config(
            r#"
            replications = 10
            base_seed = 4
            [[cell]]
            model = "M1"
            p = 100
            n = 20
            rho = [0.0, 0.9]
            noise_family = ["normal", "t1"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.cells.len(), 4);
        assert_eq!(
            cfg.cells[1].spec.noise_family,
            Some(Family::StudentT { dof: 1.0 })
        );
        assert_eq!(cfg.cells[2].spec.rho, Some(0.9));
        assert!(cfg
            .cells
            .iter()
            .all(|c| c.replications == 10 && c.base_seed == 4));
        assert_eq!(cfg.cells[0].methods.len(), 4);
    }

    #[test]
    fn method_subset_and_overrides() {
        let cfg = parse_run_config(
            r#"
            [[method]]
            label = "A"
            method = "cch"
            k = 3
            kn = 2
            [[method]]
            method = "sis"
            [[cell]]
            model = 4
            p = 100
            n = 50
            t_mix = 0
            methods = ["SIS"]
            seed = 9
            m = 5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.methods[0].config.neighborhood.unwrap().k, 3);
        let cell = &cfg.cells[0];
        assert_eq!(cell.methods.len(), 1);
        assert_eq!(cell.methods[0].label, "SIS");
        assert_eq!(
            (cell.base_seed, cell.selection_m, cell.replications),
            (9, Some(5), DEFAULT_REPLICATIONS)
        );
        assert_eq!(cell.spec.model, SimModel::M4);
    }

    #[test]
    fn all_unknown_keys_reported() {
        let err = parse_run_config(
            r#"
            bogus = 1
            [[cell]]
            model = "M1"
            p = 100
            n = 20
            rho = 0.0
            colour = "red"
            "#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(err.is_config());
        assert!(
            msg.contains("bogus") && msg.contains("cell[0].colour"),
            "{msg}"
        );
    }

    #[test]
    fn zero_cells_rejected() {
        assert!(parse_run_config("replications = 3")
            .unwrap_err()
            .is_config());
    }

    #[test]
    fn invalid_cell_rejected() {
        let err =
            parse_run_config("[[cell]]\nmodel = \"M1\"\np = 100\nn = 20\nrho = 1.5\n").unwrap_err();
        assert!(err.is_config());
    }
}
