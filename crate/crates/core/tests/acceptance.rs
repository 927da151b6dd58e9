//! One line per acceptance criterion. Exits nonzero if any criterion fails.
//! Time limits are part of each check; tolerances are exact equality.

use hquot::config::Config;
use hquot::selftest::{run_all, Status};

fn main() {
    let results = run_all(&Config::default());
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| r.status != Status::Pass).count();
    println!("acceptance: {} passed, {failed} not passed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
