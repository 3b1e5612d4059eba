fn main() -> std::process::ExitCode {
    airblock_core::cli::main()
}
