use std::path::{Path, PathBuf};

use modeflux::config::hash_hex;
use modeflux::detection::DetectionParams;
use modeflux::diversity::{
    diversity_rate_samples, epsilon_outage_rate, outage_probability, sinr_samples, CombiningRule, DiversityConfig,
};
use modeflux::ensemble::phase_uniformity_check;
use modeflux::optimizer::{
    best_diversity_set, best_of_curve, optimal_transmit_set, transmit_set_curve, DiversitySearchOptions,
    TransmitChoice,
};
use modeflux::persist::{
    cache_file_name, ensure_ensemble, load_ensemble_checked, CacheStatus, CACHE_DIR_ENV,
};
use modeflux::rates::{average_asymptotic_aar, average_rates, dbm_to_watts, AsymptoticAar, LinkBudget};
use modeflux::turbulence::{
    analytic_structure_function, default_separations, structure_function_profile, ScreenGenerator,
};
use modeflux::{ChannelEnsemble, ModeState, SimulationConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{Command, DiversityArgs, EnsembleArgs, OptimizeArgs, RatesArgs, Source, ValidateArgs};
use crate::output::{emit, num, set_cell, with_suffix, Csv};
use crate::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ensemble(a) => ensemble(a),
        Command::Rates(a) => rates(a),
        Command::Optimize(a) => optimize(a),
        Command::Diversity(a) => diversity(a),
        Command::Validate(a) => validate(a),
    }
}

fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("modeflux-cache"))
}

fn load_config(source: &Source) -> Result<Option<SimulationConfig>, CliError> {
    let Some(path) = &source.config else {
        return Ok(None);
    };
    let mut c = SimulationConfig::load(path)?;
    if let Some(seed) = source.seed_override {
        c.ensemble.base_seed = seed;
    }
    c.validate()?;
    Ok(Some(c))
}

fn require_config(source: &Source) -> Result<SimulationConfig, CliError> {
    load_config(source)?.ok_or_else(|| CliError::Usage("--config is required".into()))
}

fn default_cache(config: &SimulationConfig) -> PathBuf {
    cache_dir().join(cache_file_name(config))
}

/// Cache path, config (if any) and detection parameters of an analysis command.
struct Loaded {
    ensemble: ChannelEnsemble,
    detection: DetectionParams,
}

fn load(source: &Source) -> Result<Loaded, CliError> {
    let config = load_config(source)?;
    let path = match (&source.cache, &config) {
        (Some(p), _) => p.clone(),
        (None, Some(c)) => default_cache(c),
        (None, None) => return Err(CliError::Usage("give --cache or --config".into())),
    };
    let expected = config.as_ref().map(|c| c.config_hash());
    let ensemble = load_ensemble_checked(&path, expected.as_ref())?;
    let detection = match &config {
        Some(c) => c.detection_params()?,
        None => DetectionParams::default(),
    };
    Ok(Loaded { ensemble, detection })
}

fn parse_states(text: &str) -> Result<Vec<ModeState>, CliError> {
    let states = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i32>()
                .map(ModeState)
                .map_err(|_| CliError::Usage(format!("bad mode state {t:?} in {text:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if states.is_empty() {
        return Err(CliError::Usage("empty mode set".into()));
    }
    Ok(states)
}

fn parse_f64(t: &str) -> Result<f64, CliError> {
    t.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("bad number {t:?}")))
}

/// "a,b,c" or the inclusive sweep "start:stop:step".
fn parse_powers(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, s) = (parse_f64(start)?, parse_f64(stop)?, parse_f64(step)?);
            if !(s > 0.0) || b < a {
                return Err(CliError::Usage(format!("bad sweep {text:?}")));
            }
            let count = ((b - a) / s + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| a + k as f64 * s).collect())
        }
        [_] => text.split(',').map(parse_f64).collect(),
        _ => Err(CliError::Usage(format!("bad power list {text:?}"))),
    }
}

fn parse_sizes(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad size {text:?}; use N or lo..hi"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).collect())
    } else {
        Ok(vec![text.trim().parse().map_err(|_| bad())?])
    }
}

fn ensemble(a: EnsembleArgs) -> Result<(), CliError> {
    let config = require_config(&a.source)?;
    let path = a
        .out
        .or(a.source.cache)
        .unwrap_or_else(|| default_cache(&config));
    let (e, status) = ensure_ensemble(&config, &path, a.force)?;
    match status {
        CacheStatus::Loaded => println!("cache up to date: {}", path.display()),
        CacheStatus::Generated => println!(
            "wrote {} realizations to {} (config_hash={})",
            e.len(),
            path.display(),
            hash_hex(e.config_hash())
        ),
    }
    Ok(())
}

fn rates(a: RatesArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let tx = parse_states(&a.tx)?;
    let powers = parse_powers(&a.pt_dbm)?;
    let mut header = vec!["pt_dbm".to_string(), "aar_nats".to_string()];
    header.extend(tx.iter().map(|s| format!("rate_{}", s.ell())));
    let mut csv = Csv::new(l.ensemble.config_hash(), &header);
    let budget = LinkBudget::new(dbm_to_watts(powers[0]), tx.clone(), l.detection)?;
    for &p in &powers {
        let r = average_rates(&l.ensemble, &budget.with_pt(dbm_to_watts(p))?)?;
        let mut row = vec![num(p), num(r.iter().sum())];
        row.extend(r.iter().map(|&v| num(v)));
        csv.row(&row);
    }
    csv.comment(&match average_asymptotic_aar(&l.ensemble, &tx)? {
        AsymptoticAar::Finite(v) => format!("asymptotic_aar_nats={}", num(v)),
        AsymptoticAar::NotInterferenceLimited => "asymptotic_aar_nats=unbounded".to_string(),
    });
    emit(&csv.into_string(), a.out.as_deref())
}

fn choice_json(c: &TransmitChoice) -> Value {
    json!({
        "n": c.n,
        "set": c.set.iter().map(|s| s.ell()).collect::<Vec<_>>(),
        "objective": c.objective.value(),
    })
}

fn optimize(a: OptimizeArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let sizes = parse_sizes(&a.n)?;
    let hash = hash_hex(l.ensemble.config_hash());
    let value = if sizes.len() == 1 {
        let mut v = choice_json(&optimal_transmit_set(&l.ensemble, sizes[0])?);
        v["config_hash"] = json!(hash);
        v
    } else {
        let curve = transmit_set_curve(&l.ensemble, &sizes)?;
        let best = best_of_curve(&curve).expect("at least one size");
        let mut v = choice_json(best);
        v["config_hash"] = json!(hash);
        v["curve"] = Value::Array(curve.iter().map(choice_json).collect());
        v
    };
    let mut text = serde_json::to_string_pretty(&value).expect("JSON value serializes");
    text.push('\n');
    emit(&text, a.out.as_deref())
}

fn diversity(a: DiversityArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let e = &l.ensemble;
    let tx = parse_states(&a.tx)?;
    let i = ModeState(a.channel);
    let search = best_diversity_set(
        e,
        i,
        &tx,
        DiversitySearchOptions {
            max_size: a.max_size,
            saturation_delta: a.saturation_delta,
            window: a.window,
            unrestricted: a.unrestricted,
        },
    )?;
    let mut table = Csv::new(e.config_hash(), &["m".into(), "best_set".into(), "eff_db".into()]);
    table.comment(&format!("channel={} tx={} best_set={}", i.ell(), set_cell(&tx), set_cell(&search.best)));
    for step in &search.record {
        table.row(&[step.size.to_string(), set_cell(&step.set), num(step.eff_db)]);
    }

    let threshold = 10f64.powf(a.threshold_db / 10.0);
    let mut outage = Csv::new(
        e.config_hash(),
        &["pt_dbm", "p_out_no_div", "p_out_div", "rate_out_no_div", "rate_out_div"].map(String::from),
    );
    outage.comment(&format!(
        "channel={} best_set={} threshold_db={} epsilon={}",
        i.ell(),
        set_cell(&search.best),
        num(a.threshold_db),
        num(a.epsilon)
    ));
    let alone = DiversityConfig::new(i, vec![i], CombiningRule::Mrc)?;
    let combined = DiversityConfig::new(i, search.best.clone(), CombiningRule::Mrc)?;
    for p in parse_powers(&a.pt_dbm)? {
        let budget = LinkBudget::new(dbm_to_watts(p), tx.clone(), l.detection)?;
        let p0 = outage_probability(&sinr_samples(e, &alone, &budget)?, threshold)?;
        let p1 = outage_probability(&sinr_samples(e, &combined, &budget)?, threshold)?;
        let r0 = epsilon_outage_rate(&diversity_rate_samples(e, i, &[i], &budget)?, a.epsilon)?;
        let r1 = epsilon_outage_rate(&diversity_rate_samples(e, i, &search.best, &budget)?, a.epsilon)?;
        outage.row(&[num(p), num(p0), num(p1), num(r0), num(r1)]);
    }
    write_pair(table.into_string(), outage.into_string(), "outage", a.out.as_deref())
}

/// Two tables: one file plus a suffixed sibling, or both on stdout.
fn write_pair(first: String, second: String, suffix: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => {
            emit(&first, Some(p))?;
            emit(&second, Some(&with_suffix(p, suffix)))
        }
        None => emit(&format!("{first}\n{second}"), None),
    }
}

fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let c = require_config(&a.source)?;
    let grid = c.grid_spec::<f64>()?;
    let params = c.turbulence_params::<f64>()?;
    let (slab, lambda) = (c.path.screen_spacing_m, c.optics.wavelength_m);
    let mut generator = ScreenGenerator::new(grid, params, slab, lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.ensemble.base_seed);
    let screens: Vec<_> = (0..a.screens).map(|_| generator.generate(&mut rng)).collect();
    let profile = structure_function_profile(&screens, &default_separations(grid.n_points()))?;

    let mut table = Csv::new(
        &c.config_hash(),
        &["r_m", "measured_rad2", "analytic_rad2", "rel_error"].map(String::from),
    );
    let (lo, hi) = (2.0 * c.turbulence.inner_scale_m, c.grid.extent_m / 4.0);
    let mut worst = 0.0_f64;
    for (r, d) in profile {
        let want = analytic_structure_function(r, &params, lambda, slab);
        let rel = d / want - 1.0;
        if r >= lo && r <= hi {
            worst = worst.max(rel.abs());
        }
        table.row(&[num(r), num(d), num(want), num(rel)]);
    }
    table.comment(&format!("screens={} max_rel_error_in_[{},{}]={}", a.screens, num(lo), num(hi), num(worst)));

    let Some(path) = &a.source.cache else {
        return emit(&table.into_string(), a.out.as_deref());
    };
    let e = load_ensemble_checked(path, None)?;
    let mut phase = Csv::new(e.config_hash(), &["k", "i", "ks_distance"].map(String::from));
    for w in e.states().windows(2) {
        for (k, i) in [(w[0], w[1]), (w[1], w[0])] {
            phase.row(&[k.ell().to_string(), i.ell().to_string(), num(phase_uniformity_check(&e, k, i)?)]);
        }
    }
    write_pair(table.into_string(), phase.into_string(), "phase", a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_syntax() {
        assert_eq!(parse_powers("-4").unwrap(), vec![-4.0]);
        assert_eq!(parse_powers("-10,0,5").unwrap(), vec![-10.0, 0.0, 5.0]);
        assert_eq!(parse_powers("-2:2:1").unwrap(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(parse_powers("0:1:0.3").unwrap().len(), 4);
        assert!(parse_powers("1:0:1").is_err());
        assert!(parse_powers("x").is_err());
    }

    #[test]
    fn state_and_size_syntax() {
        assert_eq!(parse_states("-10, 0,10").unwrap(), vec![ModeState(-10), ModeState(0), ModeState(10)]);
        assert!(parse_states("1,a").is_err());
        assert_eq!(parse_sizes("3").unwrap(), vec![3]);
        assert_eq!(parse_sizes("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert!(parse_sizes("4..1").is_err());
    }
}
