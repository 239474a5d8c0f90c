//! CSV layouts. Floats use 17 significant digits so values round-trip.

use std::io::Write;

use estimand_lab::potential_outcomes::{stratum_of, DeathTime};
use estimand_lab::{Participant, Record};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    String::from(if b { "1" } else { "0" })
}

fn death(d: DeathTime) -> String {
    d.as_str().to_string()
}

pub const LATENT_BANNER: &str =
    "# ORACLE-ONLY latent potential-outcome table: both worlds of every participant; never observable in a trial";

pub fn write_observed<W: Write>(w: W, records: &[Record], k: usize) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["id", "r_obs", "x_obs"].map(String::from).to_vec();
    header.extend((1..=k).map(|j| format!("c{j}")));
    header.extend(
        [
            "m_obs",
            "death_obs",
            "t_obs",
            "y1_obs",
            "y2_obs",
            "ice_case",
            "enrolled",
            "any_dose",
            "post_randomization_data",
            "protocol_deviation",
        ]
        .map(String::from),
    );
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![r.id.to_string(), flag(r.r_obs), flag(r.x_obs)];
        row.extend(r.c.iter().map(|&v| num(v)));
        row.extend([
            flag(r.m_obs),
            death(r.death_obs),
            flag(r.t_obs),
            opt_num(r.y1_obs),
            opt_num(r.y2_obs),
            r.case.as_str().to_string(),
            flag(r.set_flags.enrolled),
            flag(r.set_flags.any_dose),
            flag(r.set_flags.post_randomization_data),
            flag(r.set_flags.protocol_deviation),
        ]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_latent<W: Write>(mut w: W, pop: &[Participant], k: usize) -> csv::Result<()> {
    writeln!(w, "{LATENT_BANNER}")?;
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["id", "s", "r"].map(String::from).to_vec();
    header.extend((1..=k).map(|j| format!("c{j}")));
    for f in [
        "x_under", "y1_under", "y2_under", "y2_free", "m_under", "death_under", "t_under", "withdraw_under",
        "deviation_under",
    ] {
        header.push(format!("{f}_0"));
        header.push(format!("{f}_1"));
    }
    header.extend(["dosed", "stratum"].map(String::from));
    out.write_record(&header)?;
    for p in pop {
        let mut row = vec![p.id.to_string(), flag(p.s), flag(p.r)];
        row.extend(p.c.iter().map(|&v| num(v)));
        let pair = |a: [bool; 2]| [flag(a[0]), flag(a[1])];
        let fpair = |a: [f64; 2]| [num(a[0]), num(a[1])];
        row.extend(pair(p.x_under));
        row.extend(fpair(p.y1_under));
        row.extend(fpair(p.y2_under));
        row.extend(fpair(p.y2_free));
        row.extend(pair(p.m_under));
        row.extend(p.death_under.map(death));
        row.extend(pair(p.t_under));
        row.extend(pair(p.withdraw_under));
        row.extend(pair(p.deviation_under));
        row.push(flag(p.dosed));
        row.push(stratum_of(p).short_name().to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub const TRUTH_HEADER: [&str; 4] = ["estimand", "strategy", "oracle", "population_size_used"];

pub const RESULTS_HEADER: [&str; 19] = [
    "kind",
    "estimand",
    "strategy",
    "replication",
    "status",
    "point",
    "std_error",
    "ci_low",
    "ci_high",
    "n_used",
    "n_imputations",
    "oracle",
    "reps",
    "failures",
    "mean",
    "mc_se",
    "gap",
    "gap_se",
    "within_3se",
];

pub const COMPARE_HEADER: [&str; 13] = [
    "estimand",
    "strategy",
    "analysis_set",
    "reps",
    "failures",
    "mean",
    "mc_se",
    "oracle",
    "gap",
    "gap_se",
    "within_3se",
    "mean_max_abs_smd",
    "flagged_share",
];
