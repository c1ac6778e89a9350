//! Acceptance suite: one line per criterion. Pass criterion numbers as
//! arguments to run a subset.

use dormantwalk_cli::acceptance::run_all;

fn main() {
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    println!("running acceptance criteria");
    let outcomes = run_all(&ids, |o| println!("{o}"));
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("\nacceptance: {} passed, {} failed {:?}", outcomes.len() - failed.len(), failed.len(), failed);
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
