pub mod constrain;
pub mod demo_ecs;
pub mod extend_population;
pub mod run_scenario;
pub mod spinup;
pub mod synth_data;
