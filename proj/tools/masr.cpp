#include <iostream>

#include <CLI11.hpp>

#include "masr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-round agentic video question answering"};
  app.require_subcommand(1);

  masr::RunOptions run;
  std::string config, dataset, out, mock_tables;
  auto* run_cmd = app.add_subcommand("run", "answer every task of a dataset and write traces");
  run_cmd->add_option("--config", config, "config file (JSON)");
  run_cmd->add_option("--dataset", dataset, "dataset directory, .jsonl file or .json dataset spec");
  run_cmd->add_option("--out", out, "output directory")->required();
  run_cmd->add_flag("--mock", run.mock, "use the offline mock backends");
  run_cmd->add_option("--mock-tables", mock_tables, "mock tables (default: <dataset dir>/mock_tables.json)");
  run_cmd->add_option("--parallel", run.parallel, "concurrent tasks");
  run_cmd->add_option("--max-rounds", run.max_rounds);
  run_cmd->add_option("--k-v", run.k_v);
  run_cmd->add_option("--k-f", run.k_f);
  run_cmd->add_option("--k-c", run.k_c);
  run_cmd->add_option("--dte-wn", run.dte_wn);
  run_cmd->add_option("--dte-w", run.dte_w);
  run_cmd->add_option("--dte-s", run.dte_s);
  run_cmd->add_option("--dte-r", run.dte_r);
  run_cmd->add_option("--n-clusters", run.n_clusters);
  run_cmd->add_option("--seed", run.seed);

  std::string traces_dir, eval_dataset;
  auto* eval_cmd = app.add_subcommand("eval", "score a directory of traces");
  eval_cmd->add_option("traces", traces_dir, "directory of trace files")->required();
  eval_cmd->add_option("--dataset", eval_dataset, "dataset the traces were produced from")->required();

  std::string spec_path, synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset with mock tables");
  synth_cmd->add_option("spec", spec_path, "synthetic spec or config file (JSON)")->required();
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  std::string trace_file;
  auto* trace_cmd = app.add_subcommand("trace", "render a trace round by round");
  trace_cmd->add_option("file", trace_file, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) {
    if (!config.empty()) run.config = config;
    if (!dataset.empty()) run.dataset = dataset;
    if (!mock_tables.empty()) run.mock_tables = mock_tables;
    run.out = out;
    return masr::cmd_run(run, std::cout, std::cerr);
  }
  if (*eval_cmd) return masr::cmd_eval(traces_dir, eval_dataset, std::cout, std::cerr);
  if (*synth_cmd) return masr::cmd_synth(spec_path, synth_out, std::cout, std::cerr);
  return masr::cmd_trace(trace_file, std::cout, std::cerr);
}
