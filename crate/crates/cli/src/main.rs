fn main() {
    std::process::exit(hecloud_cli::run());
}
