fn main() {
    std::process::exit(partition_mac::cli::run(std::env::args_os()));
}
