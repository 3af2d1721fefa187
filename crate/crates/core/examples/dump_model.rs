//! Writes one seeded draw of a simulation model as CSV (`Y,X1,..,Xp`).
//!
//! ```text
//! cargo run -p ecr-screen --example dump_model -- M1 100 20 0.0 7 > m1.csv
//! ```

use std::io::Write;

use ecr_screen::simgen::generate_seeded;
use ecr_screen::{Family, SimModel, SimModelSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 5 {
        eprintln!("usage: dump_model MODEL P N RHO_OR_TMIX SEED");
        std::process::exit(2);
    }
    let model: SimModel = args[0].parse().expect("model");
    let p: usize = args[1].parse().expect("p");
    let n: usize = args[2].parse().expect("n");
    let param: f64 = args[3].parse().expect("rho or t_mix");
    let seed: u64 = args[4].parse().expect("seed");
    let spec = if model.is_linear_design() {
        SimModelSpec::linear(model, p, n, param, Family::Normal, Family::Normal)
    } else {
        SimModelSpec::additive(model, p, n, param)
    };
    let sample = generate_seeded::<f64>(&spec, seed).unwrap_or_else(|e| {
        eprintln!("dump_model: {e}");
        std::process::exit(2);
    });

    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    writeln!(out, "{}", sample.data.labels().join(",")).unwrap();
    for row in sample.data.values().rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", fields.join(",")).unwrap();
    }
}
