use anyhow::Result;
use fairdice::ensemble::RMSE_THRESHOLD;
use fairdice::history::{ecs_variation_demo, DEMO_ECS_VALUES};
use fairdice::io::{fmt, write_rows};
use fairdice::numerics::interp;

use crate::data::{DataDir, HISTORY_SERIES};
use crate::output::Outputs;
use crate::Settings;

pub fn run(s: &Settings) -> Result<()> {
    let data = DataDir::new(&s.data);
    let median = data.median()?;
    let drivers = data.drivers(HISTORY_SERIES)?;
    let obs = data.observations()?;
    let cases = ecs_variation_demo(&median, &drivers, &obs, &DEMO_ECS_VALUES)?;

    let mut out = Outputs::new(&s.config.hash(), s.seed);
    let mut headers = vec!["year".to_string()];
    headers.extend(cases.iter().map(|c| format!("ecs{}", c.ecs)));
    headers.push("obs".into());
    let h: Vec<&str> = headers.iter().map(String::as_str).collect();
    out.csv("demo_ecs.csv", |w| {
        write_rows(
            w,
            &h,
            obs.years.iter().zip(&obs.values).map(|(y, o)| {
                let mut row = vec![fmt(*y)];
                row.extend(cases.iter().map(|c| fmt(interp(&c.series.years, &c.series.values, *y))));
                row.push(fmt(*o));
                row
            }),
        )
    })?;
    for c in &cases {
        log::info!("ECS {} K: RMSE {:.3} K", c.ecs, c.rmse);
    }
    out.csv("demo_ecs_rmse.csv", |w| {
        write_rows(
            w,
            &["ecs", "rmse", "within_threshold"],
            cases
                .iter()
                .map(|c| vec![fmt(c.ecs), fmt(c.rmse), (c.rmse <= RMSE_THRESHOLD).to_string()]),
        )
    })?;
    out.commit(&s.out)
}
