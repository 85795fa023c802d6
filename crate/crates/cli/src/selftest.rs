use serde::Serialize;

use frame_extract::oracle::{self, KtInstance, OracleComparison, GREEDY_SLACK};

use crate::commands::emit;
use crate::{Cli, Failure, SelftestArgs};

#[derive(Serialize)]
struct SelftestReport {
    subsets: OracleComparison,
    zero_diagonal: Vec<KtInstance>,
    lunin_pass: bool,
    bt_pass: bool,
    zero_diagonal_pass: bool,
}

pub fn run(cli: &Cli, a: &SelftestArgs) -> Result<(), Failure> {
    let subsets = oracle::compare_with_oracles(a.seed, a.instances)?;
    let zero_diagonal = oracle::compare_kt(a.seed, a.instances.min(20), 12, 1.0 / 3.0)?;
    let total = subsets.instances.len();
    let lunin_pass = subsets.lunin_within_slack == total;
    let bt_pass = subsets.bt_within_one * 10 >= total * 9;
    let zero_diagonal_pass = zero_diagonal
        .iter()
        .all(|x| x.greedy <= GREEDY_SLACK * x.exact * (1.0 + 1e-12) + 1e-15);
    let pass = lunin_pass && bt_pass && zero_diagonal_pass;
    emit(
        cli,
        "selftest",
        format!("instances={} seed={}", a.instances, a.seed),
        SelftestReport {
            subsets,
            zero_diagonal,
            lunin_pass,
            bt_pass,
            zero_diagonal_pass,
        },
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::SelftestFailed)
    }
}
