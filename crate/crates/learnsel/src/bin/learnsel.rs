fn main() -> std::process::ExitCode {
    learnsel::cli::main()
}
