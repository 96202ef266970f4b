fn main() -> std::process::ExitCode {
    concert_planner::cli::main()
}
