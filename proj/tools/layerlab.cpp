#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "layerlab/cli.hpp"

namespace lc = layerlab::cli;

int main(int argc, char** argv) {
    CLI::App app{"layerlab: boundary-layer analysis of the damped wave equation"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> tasks, overrides;
    int workers = 0;
    bool plot = false;

    auto* run = app.add_subcommand("run", "execute the configured tasks");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--task", tasks, "task to run (repeatable); replaces the configured task list");
    run->add_option("--out", out_dir, "output directory (default: $LAYERLAB_OUT, else ./layerlab_out)");
    run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--emit-plot-data", plot, "also write two-column .dat files");
    run->add_option("--set", overrides, "override a configuration entry, key=value (repeatable)");

    auto* check = app.add_subcommand("check-config", "validate a configuration file");
    check->add_option("--config", config_path, "configuration file")->required();
    check->add_option("--set", overrides, "override a configuration entry, key=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    lc::RunConfig rc;
    try {
        rc = lc::parse_config(config_path, overrides);
        if (!tasks.empty()) {
            rc.tasks.clear();
            for (const auto& t : tasks) rc.tasks.push_back(lc::parse_task(t));
        }
        if (!out_dir.empty()) rc.output_dir = out_dir;
        if (workers > 0) rc.workers = workers;
        if (plot) rc.emit_plot_data = true;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    if (check->parsed()) {
        std::cout << "config ok: " << rc.sweep.size() << " eps value(s), " << rc.tasks.size() << " task(s)\n";
        return 0;
    }

    try {
        const auto res = lc::run(rc);
        for (const auto& j : res.jobs)
            std::cout << lc::to_string(j.task) << " eps=" << layerlab::fmt_label(j.eps) << ' '
                      << (j.passed ? "PASS" : "FAIL") << ' ' << j.detail << '\n';
        if (res.jobs.empty()) std::cout << "no tasks\n";
        if (res.exit_code != 0) std::cerr << "first failing task: " << res.first_failure << '\n';
        return res.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "run error: " << e.what() << '\n';
        return 1;
    }
}
