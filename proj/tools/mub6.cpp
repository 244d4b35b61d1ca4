// mub6: set generation, PREHAD enumeration, stage 2, verification.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "mub6/detail/binary_io.hpp"
#include "mub6/hadsearch.hpp"
#include "mub6/stage2.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mub6;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kCorrupt = 2, kMismatch = 3, kUnresolved = 4 };

using Clock = std::chrono::steady_clock;

int default_threads() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

void write_json_atomic(const fs::path& path, const json& j) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void patch_count(std::fstream& file, std::uint64_t count) {
  file.seekp(static_cast<std::streamoff>(kStreamCountOffset));
  detail::put_le<std::uint64_t>(file, count);
  file.seekp(0, std::ios::end);
}

// ---------------------------------------------------------------------------

struct GenSetsArgs {
  DiscParams params;
  std::vector<std::string> kinds{"ort", "ub"};
  std::string out = ".";
  int threads = default_threads();
};

int cmd_gen_sets(const GenSetsArgs& a) {
  a.params.validate();
  bool ort = false, ub = false;
  for (const auto& k : a.kinds) {
    if (k == "ort") ort = true;
    else if (k == "ub") ub = true;
    else throw ConfigError("unknown kind '" + k + "' (expected ort or ub)");
  }
  SetBundle sets = SetBundle::generate(a.params, ort, ub, a.threads);
  sets.save(a.out);
  for (const VectorSet* s : {&sets.ort_mon, &sets.ort, &sets.ort_eps, &sets.ub_mon, &sets.ub, &sets.ub_eps}) {
    if (s->n() == 0) continue;
    std::cout << to_string(s->kind()) << ' ' << s->size() << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct EnumerateArgs {
  DiscParams params;
  ShardSpec shard;
  std::string sets_dir = ".";
  std::string out;
  std::string checkpoint;
  double checkpoint_interval = 60.0;
  bool prune = false;
  int refine_depth = 1;
  bool count_only = false;
  std::size_t max_positions = std::numeric_limits<std::size_t>::max();
};

void apply_manifest(const std::string& path, EnumerateArgs& a) {
  json m = read_json(path);
  a.params.n = m.at("n").get<int>();
  a.params.depth = m.at("depth").get<int>();
  a.shard.index = m.at("shard_index").get<std::uint32_t>();
  a.shard.total = m.at("shard_total").get<std::uint32_t>();
  a.sets_dir = m.value("sets_dir", a.sets_dir);
  a.out = m.value("output", a.out);
  a.checkpoint = m.value("checkpoint", a.checkpoint);
  a.checkpoint_interval = m.value("checkpoint_interval_s", a.checkpoint_interval);
  a.prune = m.value("prune", a.prune);
  a.refine_depth = m.value("refine_depth", a.refine_depth);
}

json enumerate_identity(const EnumerateArgs& a) {
  return {{"n", a.params.n},         {"depth", a.params.depth}, {"shard_index", a.shard.index},
          {"shard_total", a.shard.total}, {"prune", a.prune},     {"refine_depth", a.refine_depth},
          {"output", a.out}};
}

int cmd_enumerate(const EnumerateArgs& a) {
  a.params.validate();
  a.shard.validate();
  if (a.out.empty() && !a.count_only) throw ConfigError("--out is required unless --count-only");
  SetBundle sets = SetBundle::load(a.sets_dir, a.params, true, false);
  PruneConfig prune_config;
  prune_config.refine_depth = a.refine_depth;
  prune_config.validate();

  EnumerateOptions options;
  options.shard = a.shard;
  options.max_positions = a.max_positions;
  std::uint64_t written = 0;
  std::uint64_t emitted_before = 0;

  StreamHeader header{a.prune ? StreamKind::Had : StreamKind::Prehad, a.params, a.shard, 0};
  std::fstream out;
  const json identity = enumerate_identity(a);
  if (!a.count_only) {
    bool resumed = false;
    if (!a.checkpoint.empty() && fs::exists(a.checkpoint)) {
      json cp = read_json(a.checkpoint);
      if (cp.at("identity") != identity) throw ParamMismatch("checkpoint " + a.checkpoint + " belongs to another run");
      if (!fs::exists(a.out)) throw CorruptionError("checkpoint present but output missing: " + a.out, 0);
      const auto bytes = cp.at("bytes").get<std::uint64_t>();
      if (fs::file_size(a.out) < bytes) throw CorruptionError("output shorter than checkpoint", fs::file_size(a.out));
      fs::resize_file(a.out, bytes);
      options.start_position = cp.at("next_position").get<std::size_t>();
      written = cp.at("written").get<std::uint64_t>();
      emitted_before = cp.at("emitted").get<std::uint64_t>();
      out.open(a.out, std::ios::in | std::ios::out | std::ios::binary);
      out.seekp(0, std::ios::end);
      resumed = true;
    }
    if (!resumed) {
      out.open(a.out, std::ios::out | std::ios::binary | std::ios::trunc);
      if (out) write_stream_header(out, header);
    }
    if (!out) throw std::runtime_error("cannot write " + a.out);
  }

  auto save_checkpoint = [&](std::size_t next_position, std::uint64_t emitted) {
    if (a.checkpoint.empty() || a.count_only) return;
    out.flush();
    json cp = {{"identity", identity},
               {"next_position", next_position},
               {"emitted", emitted_before + emitted},
               {"written", written},
               {"bytes", kStreamHeaderSize + written * kStreamRecordSize}};
    write_json_atomic(a.checkpoint, cp);
  };

  auto last_checkpoint = Clock::now();
  options.on_position_done = [&](std::size_t next_position, std::uint64_t emitted) {
    const double since = std::chrono::duration<double>(Clock::now() - last_checkpoint).count();
    if (since >= a.checkpoint_interval) {
      save_checkpoint(next_position, emitted);
      last_checkpoint = Clock::now();
    }
  };

  auto stats = enumerate_prehad(sets, options, [&](const DiscMat& m) {
    if (a.prune && !prune_to_had(m, prune_config, a.params)) return;
    if (!a.count_only) detail::put_core(out, m);
    ++written;
  });

  if (!a.count_only) {
    patch_count(out, written);
    save_checkpoint(stats.next_position, stats.emitted);
    out.close();
    if (!out) throw std::runtime_error("write failed: " + a.out);
  }
  std::cout << "shard " << a.shard.index << '/' << a.shard.total << " positions " << stats.next_position << '/'
            << stats.positions_total << " prehad " << emitted_before + stats.emitted;
  if (a.prune) std::cout << " kept " << written;
  std::cout << (stats.complete() ? " complete" : " partial") << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct Stage2Args {
  std::string in;
  std::string sets_dir = ".";
  std::string out;
  std::string checkpoint;
  std::int64_t budget_ms = 60'000;
  int n = 0;
  int depth = 0;
  std::size_t max_matrices = std::numeric_limits<std::size_t>::max();
};

int cmd_stage2(const Stage2Args& a) {
  StreamHeader header;
  const auto matrices = read_matrix_stream(a.in, &header);
  if ((a.n && a.n != header.params.n) || (a.depth && a.depth != header.params.depth)) {
    throw ParamMismatch("stream has n=" + std::to_string(header.params.n) + " depth=" +
                        std::to_string(header.params.depth) + ", requested n=" + std::to_string(a.n) +
                        " depth=" + std::to_string(a.depth));
  }
  Stage2Options options;
  options.budget = std::chrono::milliseconds(a.budget_ms);

  std::size_t next = 0;
  std::array<std::uint64_t, 3> tally{};
  std::fstream out;
  const json identity = {{"input", a.in}, {"output", a.out}, {"n", header.params.n}, {"depth", header.params.depth}};
  if (!a.checkpoint.empty() && fs::exists(a.checkpoint)) {
    json cp = read_json(a.checkpoint);
    if (cp.at("identity") != identity) throw ParamMismatch("checkpoint " + a.checkpoint + " belongs to another run");
    fs::resize_file(a.out, cp.at("bytes").get<std::uint64_t>());
    next = cp.at("next_index").get<std::size_t>();
    tally = cp.at("tally").get<std::array<std::uint64_t, 3>>();
    out.open(a.out, std::ios::in | std::ios::out | std::ios::binary);
    out.seekp(0, std::ios::end);
  } else {
    out.open(a.out, std::ios::out | std::ios::binary | std::ios::trunc);
    write_certificate_header(out);
  }
  if (!out) throw std::runtime_error("cannot write " + a.out);

  if (next < matrices.size()) {
    SetBundle sets = SetBundle::load(a.sets_dir, header.params, true, true);
    std::size_t done = 0;
    for (; next < matrices.size() && done < a.max_matrices; ++next, ++done) {
      auto cert = process_a(matrices[next], sets, options);
      write_certificate(out, cert);
      ++tally[static_cast<std::size_t>(cert.verdict)];
      if (!a.checkpoint.empty()) {
        out.flush();
        write_json_atomic(a.checkpoint, {{"identity", identity},
                                         {"next_index", next + 1},
                                         {"tally", tally},
                                         {"bytes", static_cast<std::uint64_t>(out.tellp())}});
      }
    }
  }
  out.close();
  if (!out) throw std::runtime_error("write failed: " + a.out);
  std::cout << "contradiction " << tally[0] << " extension_found " << tally[1] << " unresolved " << tally[2]
            << (next < matrices.size() ? " partial" : "") << '\n';
  return tally[2] > 0 ? kUnresolved : kOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string path;
  std::string sets_dir;
  int n = 0;
  int depth = 8;
  int threads = default_threads();
};

std::string read_magic_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic(8, '\0');
  in.read(magic.data(), 8);
  return in ? magic : std::string{};
}

VectorSet regenerate(SetKind kind, const DiscParams& params, int threads) {
  VectorSet mon = gen_mon(feas_kind_of(kind), params, threads);
  if (kind == SetKind::OrtMon || kind == SetKind::UbMon) return mon;
  VectorSet full = expand_permutations(mon);
  if (kind == SetKind::Ort || kind == SetKind::Ub) return full;
  return expand_eps(full);
}

int verify_set(const VerifyArgs& a) {
  VectorSet set = read_set(a.path);
  std::cout << a.path << ": " << to_string(set.kind()) << " n=" << set.n() << " depth=" << set.depth() << " count "
            << set.size() << '\n';
  if (set.kind() == SetKind::UbOfA || set.kind() == SetKind::UbOfAB) {
    std::cout << "structure clean (derived set, not regenerated)\n";
    return kOk;
  }
  VectorSet expect = regenerate(set.kind(), set.params(), a.threads);
  if (expect.size() != set.size()) {
    throw CorruptionError("count " + std::to_string(set.size()) + " differs from regenerated " +
                              std::to_string(expect.size()),
                          12);
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (int k = 0; k < kFree; ++k) {
      if (set[i][k] != expect[i][k]) {
        throw CorruptionError("record " + std::to_string(i) + " is " + to_string(set[i]) + ", regenerated " +
                                  to_string(expect[i]),
                              20 + 10 * i + 2 * static_cast<std::uint64_t>(k));
      }
    }
  }
  std::cout << "clean\n";
  return kOk;
}

int verify_stream(const VerifyArgs& a) {
  StreamHeader header;
  const auto matrices = read_matrix_stream(a.path, &header);
  std::cout << a.path << ": " << (header.kind == StreamKind::Had ? "had" : "prehad") << " n=" << header.params.n
            << " depth=" << header.params.depth << " shard " << header.shard.index << '/' << header.shard.total
            << " count " << matrices.size() << '\n';
  std::optional<SetBundle> sets;
  if (!a.sets_dir.empty()) sets = SetBundle::load(a.sets_dir, header.params, true, false);
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    const std::uint64_t offset = kStreamHeaderSize + i * kStreamRecordSize;
    const DiscMat& m = matrices[i];
    if (!is_canonical(m)) throw CorruptionError("record " + std::to_string(i) + " is not canonical", offset);
    if (i > 0 && !(matrices[i - 1] < m) && !(m < matrices[i - 1])) {
      throw CorruptionError("record " + std::to_string(i) + " repeats its predecessor", offset);
    }
    if (sets) {
      if (!satisfies_prehad(m, *sets)) throw CorruptionError("record " + std::to_string(i) + " violates PREHAD", offset);
      if (header.kind == StreamKind::Had && !prune_to_had(m, {}, header.params)) {
        throw CorruptionError("record " + std::to_string(i) + " fails prune_to_had", offset);
      }
      auto pos = sets->ort_mon.prefix_range(m.rows[1], kFree);
      if (pos.first == pos.second || pos.first % header.shard.total != header.shard.index) {
        throw CorruptionError("record " + std::to_string(i) + " belongs to another shard", offset);
      }
    }
  }
  std::cout << (sets ? "clean\n" : "structure clean (no --sets-dir, membership not checked)\n");
  return kOk;
}

int verify_certificates(const VerifyArgs& a) {
  if (a.n == 0) throw ConfigError("certificate files carry no parameters; pass --n (and --depth)");
  DiscParams params{a.n, a.depth};
  params.validate();
  auto certs = read_certificates(a.path, params);
  std::cout << a.path << ": " << certs.size() << " certificates\n";
  if (a.sets_dir.empty()) {
    std::cout << "structure clean (no --sets-dir, certificates not rechecked)\n";
    return kOk;
  }
  SetBundle sets = SetBundle::load(a.sets_dir, params, true, true);
  std::uint64_t offset = 8;
  int status = kOk;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const auto& cert = certs[i];
    if (cert.verdict == Verdict::Unresolved) {
      std::cout << "certificate " << i << ": unresolved, nothing to recheck\n";
    } else {
      auto result = recheck_certificate(cert, sets);
      if (!result.ok) {
        std::cout << "certificate " << i << " (offset " << offset << ") FAILED: " << result.failure << '\n';
        status = kCorrupt;
      }
    }
    offset += 50 + 1 + 32 + (cert.verdict == Verdict::ExtensionFound ? 120 : 0);
  }
  if (status == kOk) std::cout << "clean\n";
  return status;
}

int cmd_verify(const VerifyArgs& a) {
  const std::string magic = read_magic_of(a.path);
  if (magic == "MUB6SET1") return verify_set(a);
  if (magic == "MUB6MAT1") return verify_stream(a);
  if (magic == "MUB6CRT1") return verify_certificates(a);
  throw CorruptionError("unrecognized file magic", 0);
}

// ---------------------------------------------------------------------------

struct CheckVectorArgs {
  std::string bins;
  std::string kind = "ort";
  DiscParams params;
  int oracle_depth = 20;
};

int cmd_check_vector(const CheckVectorArgs& a) {
  a.params.validate();
  FeasKind kind;
  if (a.kind == "ort") kind = FeasKind::Orthogonal;
  else if (a.kind == "ub") kind = FeasKind::Unbiased;
  else throw ConfigError("--kind must be ort or ub");
  DiscVec v = parse_vec(a.bins);
  if (!is_valid(v, a.params.n)) throw ConfigError("bins must lie in [0, n)");

  std::cout << "vector " << to_string(v) << " kind " << to_string(kind) << " n=" << a.params.n
            << " depth=" << a.params.depth << '\n';
  const IntervalBox root = root_box(v, a.params.n);
  std::cout << "generation 0 midpoint residual " << midpoint_residual(root, kind) << " bound "
            << generation_bound(a.params.n, 0) << '\n';
  DescentVerdict verdict = descend(v, kind, a.params);
  if (verdict.survives) std::cout << "descend: survives\n";
  else std::cout << "descend: rejected at generation " << *verdict.rejected_at_generation << '\n';

  OracleResult oracle = oracle_feasible(v, kind, a.params.n, a.oracle_depth);
  std::cout << "oracle: " << to_string(oracle.verdict);
  if (oracle.witness) {
    std::cout << " witness (0";
    for (double phase : *oracle.witness) std::cout << ',' << phase;
    std::cout << ')';
  }
  std::cout << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct ShardPlanArgs {
  DiscParams params;
  std::uint32_t shards = 100;
  std::string sets_dir = ".";
  std::string out_dir = "manifests";
  std::string data_dir = "streams";
  bool prune = false;
  double checkpoint_interval = 60.0;
};

int cmd_shard_plan(const ShardPlanArgs& a) {
  a.params.validate();
  if (a.shards == 0) throw ConfigError("--shards must be positive");
  fs::create_directories(a.out_dir);
  const int width = static_cast<int>(std::to_string(a.shards - 1).size());
  for (std::uint32_t i = 0; i < a.shards; ++i) {
    std::ostringstream stem;
    stem << "shard_" << std::setw(width) << std::setfill('0') << i << "_of_" << a.shards;
    json m = {{"n", a.params.n},
              {"depth", a.params.depth},
              {"shard_index", i},
              {"shard_total", a.shards},
              {"sets_dir", a.sets_dir},
              {"output", (fs::path(a.data_dir) / (stem.str() + ".mat")).string()},
              {"checkpoint", (fs::path(a.data_dir) / (stem.str() + ".ckpt.json")).string()},
              {"prune", a.prune},
              {"refine_depth", 1},
              {"checkpoint_interval_s", a.checkpoint_interval}};
    const fs::path path = fs::path(a.out_dir) / (stem.str() + ".json");
    write_json_atomic(path, m);
    std::cout << path.string() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified discretization search for MUB quartets in dimension 6"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "worker threads (output does not depend on it)")->check(CLI::PositiveNumber);

  GenSetsArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-sets", "generate ORT/UB vector sets");
  gen_cmd->add_option("--n", gen.params.n)->required();
  gen_cmd->add_option("--depth", gen.params.depth);
  gen_cmd->add_option("--kinds", gen.kinds)->delimiter(',');
  gen_cmd->add_option("--out", gen.out, "output directory");

  EnumerateArgs en;
  std::string manifest;
  std::string shard_text = "0/1";
  auto* en_cmd = app.add_subcommand("enumerate", "enumerate a PREHAD shard");
  en_cmd->add_option("--manifest", manifest, "JSON manifest (from shard-plan)");
  en_cmd->add_option("--n", en.params.n);
  en_cmd->add_option("--depth", en.params.depth);
  en_cmd->add_option("--shard", shard_text, "i/m");
  en_cmd->add_option("--sets-dir", en.sets_dir);
  en_cmd->add_option("--out", en.out);
  en_cmd->add_option("--checkpoint", en.checkpoint, "checkpoint JSON; resumes when present");
  en_cmd->add_option("--checkpoint-interval", en.checkpoint_interval, "seconds");
  en_cmd->add_flag("--prune", en.prune, "keep only matrices retained by prune_to_had");
  en_cmd->add_option("--refine-depth", en.refine_depth);
  en_cmd->add_flag("--count-only", en.count_only, "count without writing a stream");
  en_cmd->add_option("--max-positions", en.max_positions, "stop after this many second rows");

  Stage2Args s2;
  auto* s2_cmd = app.add_subcommand("stage2", "search B, C for every matrix of a stream");
  s2_cmd->add_option("--in", s2.in)->required();
  s2_cmd->add_option("--sets-dir", s2.sets_dir);
  s2_cmd->add_option("--out", s2.out)->required();
  s2_cmd->add_option("--checkpoint", s2.checkpoint);
  s2_cmd->add_option("--budget-ms", s2.budget_ms, "per-matrix time budget");
  s2_cmd->add_option("--n", s2.n, "expected n (checked against the stream)");
  s2_cmd->add_option("--depth", s2.depth, "expected depth");
  s2_cmd->add_option("--max-matrices", s2.max_matrices);

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "check a set, stream or certificate file");
  ver_cmd->add_option("path", ver.path)->required();
  ver_cmd->add_option("--sets-dir", ver.sets_dir);
  ver_cmd->add_option("--n", ver.n, "parameters of a certificate file");
  ver_cmd->add_option("--depth", ver.depth);

  CheckVectorArgs cv;
  auto* cv_cmd = app.add_subcommand("check-vector", "descend and oracle verdicts for one vector");
  cv_cmd->add_option("bins", cv.bins, "j1,..,j5 or 0,j1,..,j5")->required();
  cv_cmd->add_option("--kind", cv.kind);
  cv_cmd->add_option("--n", cv.params.n);
  cv_cmd->add_option("--depth", cv.params.depth);
  cv_cmd->add_option("--oracle-depth", cv.oracle_depth);

  ShardPlanArgs sp;
  auto* sp_cmd = app.add_subcommand("shard-plan", "write one enumerate manifest per shard");
  sp_cmd->add_option("--n", sp.params.n)->required();
  sp_cmd->add_option("--depth", sp.params.depth);
  sp_cmd->add_option("--shards", sp.shards)->required();
  sp_cmd->add_option("--sets-dir", sp.sets_dir);
  sp_cmd->add_option("--out-dir", sp.out_dir);
  sp_cmd->add_option("--data-dir", sp.data_dir);
  sp_cmd->add_flag("--prune", sp.prune);
  sp_cmd->add_option("--checkpoint-interval", sp.checkpoint_interval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    gen.threads = threads;
    ver.threads = threads;
    if (*gen_cmd) return cmd_gen_sets(gen);
    if (*en_cmd) {
      if (!manifest.empty()) apply_manifest(manifest, en);
      if (!manifest.empty() && en_cmd->count("--shard")) throw ConfigError("--shard conflicts with --manifest");
      if (manifest.empty()) en.shard = parse_shard(shard_text);
      return cmd_enumerate(en);
    }
    if (*s2_cmd) return cmd_stage2(s2);
    if (*ver_cmd) return cmd_verify(ver);
    if (*cv_cmd) return cmd_check_vector(cv);
    if (*sp_cmd) return cmd_shard_plan(sp);
  } catch (const CorruptionError& e) {
    std::cerr << "corruption at byte offset " << e.offset() << ": " << e.what() << '\n';
    return kCorrupt;
  } catch (const ParamMismatch& e) {
    std::cerr << "parameter mismatch: " << e.what() << '\n';
    return kMismatch;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
