use lsc::report::report_params;

fn main() -> lsc::Result<()> {
    let report = report_params(384, 22_000_000, &[10, 1_000, 100_000, 1_000_000])?;
    print!("{report}");
    report.write_csv(std::io::stdout())?;
    Ok(())
}
