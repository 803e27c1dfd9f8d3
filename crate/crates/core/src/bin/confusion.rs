fn main() -> std::process::ExitCode {
    confusion_detect::cli::main()
}
