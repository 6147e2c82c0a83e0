fn main() {
    std::process::exit(g2_lyapunov::driver::run(std::env::args_os()));
}
