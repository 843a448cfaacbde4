use std::fs::File;

use serde_json::json;
use tubepulse_core::ingest::parse_csv;

use super::{dataset_paths, json_pretty, write_out, Io};
use crate::args::ValidateArgs;
use crate::config::Config;
use crate::failure::{CmdResult, Failure};

pub fn run(args: &ValidateArgs, config: &Config, io: &mut Io<'_>) -> CmdResult {
    let paths = dataset_paths(&args.csv, config)?;
    let mut reports = Vec::new();
    let mut rejected = 0;
    for p in &paths {
        let file = File::open(p).map_err(|e| Failure::io(p, e))?;
        // A file whose header is unusable fails as a whole.
        let report = match parse_csv(file) {
            Ok((_, report)) => report,
            Err(e) => return Err(Failure::domain(format!("{}: {e}", p.display()))),
        };
        rejected += report.rejected;
        reports.push((p, report));
    }
    let text = if args.json {
        let files: Vec<_> = reports.iter().map(|(p, r)| json!({"path": p, "report": r})).collect();
        json_pretty(&json!({ "files": files, "rejected": rejected }))
    } else {
        reports.iter().map(|(p, r)| format!("{}\n{r}", p.display())).collect()
    };
    write_out(io, &text)?;
    if rejected > 0 {
        return Err(Failure::domain(format!("{rejected} rows rejected")));
    }
    Ok(())
}
