#include "concordance/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

namespace {

concordance::Service* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    concordance::ServiceConfig config;
    try {
        config = concordance::config_from_env();
    } catch (const concordance::Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    CLI::App app{"JSON service for concordance signatures"};
    std::string data_dir = config.data_dir.string();
    app.add_option("--bind", config.bind, "Address to listen on")->capture_default_str();
    app.add_option("--port", config.port, "TCP port")->capture_default_str()->check(CLI::Range(0, 65535));
    app.add_option("--dimension-cap", config.dimension_cap, "Largest accepted dimension")->capture_default_str()->check(CLI::Range(2, 20));
    app.add_option("--data-dir", data_dir, "Directory for session documents (empty: memory only)");
    app.add_option("--mc-samples", config.mc_defaults.samples, "Default Monte Carlo sample count")->capture_default_str();
    app.add_option("--mc-seed", config.mc_defaults.seed, "Default Monte Carlo seed")->capture_default_str();
    app.add_option("--cors-origin", config.cors_origin, "Value of Access-Control-Allow-Origin")->capture_default_str();
    app.add_option("--workers", config.job_workers, "Background job threads")->capture_default_str()->check(CLI::Range(1, 64));
    CLI11_PARSE(app, argc, argv);
    config.data_dir = data_dir;

    try {
        concordance::Service service(config);
        g_service = &service;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cerr << "listening on " << config.bind << ':' << config.port << '\n';
        if (!service.listen()) {
            std::cerr << "could not listen on " << config.bind << ':' << config.port << '\n';
            return 1;
        }
        g_service = nullptr;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
