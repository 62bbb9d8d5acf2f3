#include "quicfl_cli/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "quicfl/error.hpp"
#include "quicfl/harness.hpp"
#include "quicfl/quicfl_codec.hpp"
#include "quicfl/solver.hpp"
#include "quicfl/table_io.hpp"
#include "quicfl/table_store.hpp"
#include "quicfl/vector_io.hpp"
#include "quicfl/wire.hpp"

namespace quicfl::cli {

namespace {

// Writes to the file at path, or to out when path is empty.
template <class F>
void with_output(const std::string& path, std::ostream& out, F&& body) {
  if (path.empty()) {
    body(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open '" + path + "' for writing");
  body(f);
  if (!f) throw DomainError("write to '" + path + "' failed");
}

struct TableArgs {
  std::string path;
  int b = 1;
  int ell = -1;
  int m = 512;
  std::string p = "1/512";
};

void add_table_args(CLI::App* cmd, TableArgs& a, bool with_shape) {
  cmd->add_option("--table", a.path, "Table file; default looks up the shipped table");
  if (with_shape) {
    cmd->add_option("--b", a.b, "Bits per coordinate")->check(CLI::Range(1, 8));
    cmd->add_option("--l", a.ell, "Shared random bits (default per b)")->check(CLI::Range(0, 8));
    cmd->add_option("--m", a.m, "Quantile count");
    cmd->add_option("--p", a.p, "Exact-send fraction as num/den");
  }
}

std::shared_ptr<const QuantTable> table_from(const TableArgs& a, bool need_s) {
  if (!a.path.empty()) {
    QuantTable t = load_table(a.path);
    if (need_s && !t.has_s()) t = attach_sender(t);
    return std::make_shared<const QuantTable>(std::move(t));
  }
  const int ell = a.ell >= 0 ? a.ell : default_ell(a.b);
  return std::make_shared<const QuantTable>(
      load_default_table(a.b, ell, a.m, Rational::parse(a.p), need_s));
}

std::vector<int> int_list(const std::vector<std::string>& items) {
  // Accepts "1,2,3" and "1-4" style items.
  std::vector<int> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      auto dash = part.find('-', 1);
      try {
        if (dash == std::string::npos) {
          out.push_back(std::stoi(part));
        } else {
          int lo = std::stoi(part.substr(0, dash)), hi = std::stoi(part.substr(dash + 1));
          if (hi < lo) throw DomainError("empty range '" + part + "'");
          for (int v = lo; v <= hi; ++v) out.push_back(v);
        }
      } catch (const std::logic_error&) {
        throw DomainError("malformed integer list item '" + part + "'");
      }
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"QUIC-FL distributed mean estimation toolkit", "quicfl"};
  app.require_subcommand(1, 1);
  std::uint64_t seed = 0;
  int threads = 1;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Seed for all randomness");
    cmd->add_option("--threads", threads, "Worker cap; results do not depend on it")
        ->check(CLI::PositiveNumber);
  };

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a receiver table");
  int s_b = 1, s_ell = 0, s_m = 512, s_restarts = 16, s_iters = 500;
  std::string s_p = "1/512", s_out;
  bool s_with_s = false, s_no_ladder = false;
  solve->add_option("--b", s_b, "Bits per coordinate")->required()->check(CLI::Range(1, 8));
  solve->add_option("--l", s_ell, "Shared random bits")->required()->check(CLI::Range(0, 8));
  solve->add_option("--m", s_m, "Quantile count");
  solve->add_option("--p", s_p, "Exact-send fraction as num/den");
  solve->add_option("--restarts", s_restarts, "Random restarts per level")->check(CLI::PositiveNumber);
  solve->add_option("--max-iters", s_iters, "Iteration cap per restart")->check(CLI::PositiveNumber);
  solve->add_flag("--with-s", s_with_s, "Store the sender distribution too");
  solve->add_flag("--no-ladder", s_no_ladder, "Solve only level l, without warm starts from l-1");
  solve->add_option("-o,--out", s_out, "Output path (default: canonical name)");
  add_common(solve);

  // validate
  auto* validate = app.add_subcommand("validate", "Check a table file's invariants");
  std::string v_path;
  validate->add_option("table", v_path, "Table file")->required();

  // encode
  auto* encode = app.add_subcommand("encode", "Encode one client vector");
  TableArgs e_table;
  std::string e_in, e_out;
  std::uint64_t e_global = 0, e_client = 0, e_private = 0;
  bool e_alg1 = false;
  add_table_args(encode, e_table, true);
  encode->add_option("--in", e_in, "Input vector file")->required();
  encode->add_option("--global-seed", e_global, "Seed shared by all parties")->required();
  encode->add_option("--client-seed", e_client, "Seed shared with the server")->required();
  encode->add_option("--private-seed", e_private, "Client-only seed")->required();
  encode->add_flag("--alg1", e_alg1, "Use the quantile-rounding encoder");
  encode->add_option("-o,--out", e_out, "Output message file")->required();

  // decode
  auto* decode = app.add_subcommand("decode", "Decode and average client messages");
  TableArgs d_table;
  std::vector<std::string> d_in;
  std::string d_out;
  std::optional<std::uint64_t> d_global;
  add_table_args(decode, d_table, true);
  decode->add_option("--in", d_in, "Message files")->required();
  decode->add_option("--global-seed", d_global, "Expected global seed (default: from messages)");
  decode->add_option("-o,--out", d_out, "Output vector file")->required();
  bool d_stats = false;
  decode->add_flag("--stats", d_stats, "Print decode operation counts");

  // bench-nmse
  auto* nmse = app.add_subcommand("bench-nmse", "Measure NMSE and vNMSE");
  ExperimentConfig ec;
  TableArgs n_table;
  std::string n_scheme = "quicfl", n_dist = "normal", n_out;
  bool n_header = true;
  nmse->add_option("--scheme", n_scheme, "quicfl|quicfl_alg1|bsq|qsgd|minmax_hadamard|uncompressed");
  nmse->add_option("--dist", n_dist, "normal|lognormal|identical_lognormal|sparse_spike");
  nmse->add_option("--n", ec.n, "Clients")->check(CLI::PositiveNumber);
  nmse->add_option("--d", ec.d, "Dimension")->check(CLI::PositiveNumber);
  nmse->add_option("--trials", ec.trials, "Trials")->check(CLI::PositiveNumber);
  nmse->add_option("--spike-k", ec.spike_k, "Nonzeros for sparse_spike")->check(CLI::PositiveNumber);
  nmse->add_option("-o,--out", n_out, "CSV output (default stdout)");
  nmse->add_flag("!--no-header", n_header, "Omit the CSV header row");
  add_table_args(nmse, n_table, true);
  add_common(nmse);

  // bench-sweep
  auto* sw = app.add_subcommand("bench-sweep", "Quantizer MSE over a (b, l, p) grid");
  std::vector<std::string> w_b{"1-4"}, w_l{"0-6"}, w_p{"1/512"};
  int w_m = 512, w_restarts = 8, w_nodes = 20001;
  std::string w_out;
  sw->add_option("--b", w_b, "Bit budgets, e.g. 1-4 or 1,2");
  sw->add_option("--l", w_l, "Shared bit counts, e.g. 0-6");
  sw->add_option("--p", w_p, "Fractions as num/den");
  sw->add_option("--m", w_m, "Quantile count");
  sw->add_option("--restarts", w_restarts, "Restarts per cell")->check(CLI::PositiveNumber);
  sw->add_option("--nodes", w_nodes, "Integration nodes")->check(CLI::Range(3, 10000001));
  sw->add_option("-o,--out", w_out, "CSV output (default stdout)");
  add_common(sw);

  // bench-power
  auto* pw = app.add_subcommand("bench-power", "Distributed power iteration error");
  PowerConfig pc;
  TableArgs p_table;
  std::string p_scheme = "quicfl", p_out;
  pw->add_option("--scheme", p_scheme, "quicfl|uncompressed");
  pw->add_option("--n", pc.n, "Clients")->check(CLI::PositiveNumber);
  pw->add_option("--d", pc.d, "Dimension")->check(CLI::PositiveNumber);
  pw->add_option("--rows", pc.rows_per_client, "Matrix rows per client");
  pw->add_option("--rounds", pc.rounds, "Rounds")->check(CLI::NonNegativeNumber);
  pw->add_option("--lr", pc.learning_rate, "Server learning rate");
  pw->add_option("-o,--out", p_out, "CSV output (default stdout)");
  add_table_args(pw, p_table, true);
  add_common(pw);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*solve) {
      SolverOptions o;
      o.seed = seed;
      o.threads = threads;
      o.restarts = s_restarts;
      o.max_iters = s_iters;
      const Rational p = Rational::parse(s_p);
      SolverResult res = s_no_ladder ? solve_table(QuantConfig::make(s_b, s_ell, s_m, p), o)
                                     : solve_ladder(s_b, s_ell, s_m, p, o).back();
      QuantTable t = s_with_s ? res.table : res.table.without_s();
      const std::string path = s_out.empty() ? default_table_name(s_b, s_ell, s_m, p) : s_out;
      save_table(t, path);
      out << "objective=" << format_real(res.objective) << " restart=" << res.restart_index
          << " path=" << path << "\n";
    } else if (*validate) {
      QuantTable t = load_table(v_path);
      TableDiagnostics diag = validate_table(t);
      out << diag.summary() << "\n";
      if (!diag.valid()) {
        err << "error: table violates its invariants\n";
        return kExitDomain;
      }
    } else if (*encode) {
      auto t = table_from(e_table, e_alg1);
      auto x = read_vector_file(e_in);
      EncodedVector msg = e_alg1 ? encode_alg1(x, *t, e_global, e_client, e_private)
                                 : encode_quicfl(x, *t, e_global, e_client, e_private);
      auto bytes = serialize(msg);
      write_bytes(e_out, bytes);
      out << "bytes=" << bytes.size() << " bits_per_coord=" << bits_per_coordinate(msg)
          << " outliers=" << msg.outliers.size() << "\n";
    } else if (*decode) {
      std::vector<EncodedVector> msgs;
      for (const auto& path : d_in) msgs.push_back(deserialize(read_bytes(path)));
      const bool need_s = (msgs.front().flags & kFlagAlg1) != 0;
      auto t = table_from(d_table, need_s);
      DecodeStats stats;
      auto mean = decode_aggregate(msgs, *t, d_global.value_or(msgs.front().global_seed), &stats);
      write_vector_file(d_out, mean);
      if (d_stats) {
        out << "clients=" << stats.clients << " lookups=" << stats.lookups
            << " outliers=" << stats.outliers << " inverse_transforms=" << stats.inverse_transforms
            << "\n";
      }
    } else if (*nmse) {
      ec.scheme = parse_scheme(n_scheme);
      ec.dist = parse_distribution(n_dist);
      ec.b = n_table.b;
      ec.ell = n_table.ell;
      ec.m = n_table.m;
      ec.p = Rational::parse(n_table.p);
      ec.seed = seed;
      ec.threads = threads;
      if (!n_table.path.empty()) {
        ec.table = table_from(n_table, ec.scheme == Scheme::kQuicflAlg1);
        if (ec.ell < 0) ec.ell = ec.table->config().ell;
      }
      DmeReport rep = run_dme(ec);
      with_output(n_out, out, [&](std::ostream& o) {
        if (n_header) write_dme_csv_header(o);
        write_dme_csv_row(o, ec, rep);
      });
    } else if (*sw) {
      SolverOptions o;
      o.seed = seed;
      o.threads = threads;
      o.restarts = w_restarts;
      std::vector<Rational> ps;
      for (const auto& s : w_p) ps.push_back(Rational::parse(s));
      SweepReport rep = sweep(int_list(w_b), int_list(w_l), ps, w_m, o, w_nodes);
      with_output(w_out, out, [&](std::ostream& os) { write_sweep_csv(os, rep); });
      err << "monotone_in_ell=" << (rep.monotone_in_ell ? "yes" : "no")
          << " monotone_in_b=" << (rep.monotone_in_b ? "yes" : "no") << "\n";
    } else if (*pw) {
      pc.scheme = parse_scheme(p_scheme);
      pc.b = p_table.b;
      pc.ell = p_table.ell;
      pc.m = p_table.m;
      pc.p = Rational::parse(p_table.p);
      pc.seed = seed;
      if (!p_table.path.empty()) pc.table = table_from(p_table, false);
      PowerReport rep = power_iteration(pc);
      with_output(p_out, out, [&](std::ostream& o) {
        o << "round,l2_error\n";
        for (std::size_t i = 0; i < rep.error_per_round.size(); ++i) {
          char buf[40];
          std::snprintf(buf, sizeof buf, "%.9g", rep.error_per_round[i]);
          o << i + 1 << ',' << buf << '\n';
        }
      });
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace quicfl::cli
