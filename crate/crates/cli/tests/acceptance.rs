//! All ten acceptance criteria at their stated tolerances and time limits.
//! One PASS/FAIL line per criterion; exits nonzero on any FAIL.

fn main() {
    let results = vhj_cli::acceptance::run(|r| println!("{r}"));
    let passed = results.iter().filter(|r| r.pass).count();
    println!("acceptance: {passed} of {} criteria passed", results.len());
    if passed < results.len() {
        std::process::exit(1);
    }
}
