fn main() {
    std::process::exit(distmin::cli::main_entry());
}
