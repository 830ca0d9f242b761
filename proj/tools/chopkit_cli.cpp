// Copyright 2026 The chopkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// chopkit: inspect formats, quantize array files, run demos and benchmarks.
//
// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric-domain error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <sstream>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "chopkit/chopkit.hpp"

namespace {

using namespace chopkit;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitDomain = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

unsigned default_threads() {
  if (const char* env = std::getenv("CHOPKIT_THREADS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      throw UsageError(std::string("CHOPKIT_THREADS is not a number: ") + env);
    }
  }
  return 1;
}

std::string num(double x) { return format_number(x); }

std::string spec_name(const std::string& spec) {
  return detail::to_lower(spec);
}

// -- info -------------------------------------------------------------------

void print_info(const std::string& spec, std::ostream& os) {
  const QuantizerSpec q = parse_quantizer_spec(spec);
  std::visit(
      overloaded{
          [&](const FloatFormat& f) {
            const FormatParams p = format_params(f);
            os << "format     " << spec_name(spec) << "\n"
               << "kind       float\n"
               << "exp_bits   " << f.exp_bits << "\n"
               << "sig_bits   " << f.sig_bits << "\n"
               << "t          " << f.t << "\n"
               << "emin       " << f.emin << "\n"
               << "emax       " << f.emax << "\n"
               << "bias       " << f.bias << "\n"
               << "u          " << num(p.u) << "\n"
               << "x_min      " << num(p.x_min) << "\n"
               << "x_max      " << num(p.x_max) << "\n"
               << "x_sub_min  " << num(p.x_sub_min) << "\n";
          },
          [&](const FixedFormat& f) {
            os << "format     " << spec_name(spec) << "\n"
               << "kind       fixed\n"
               << "ibits      " << f.ibits << "\n"
               << "fbits      " << f.fbits << "\n"
               << "signed     " << (f.is_signed ? "yes" : "no") << "\n"
               << "stored     [" << f.min_stored() << ", " << f.max_stored()
               << "]\n"
               << "range      [" << num(f.min_value()) << ", "
               << num(f.max_value()) << "]\n"
               << "quantum    " << num(f.quantum()) << "\n";
          },
          [&](const IntQuantConfig& c) {
            os << "format     " << spec_name(spec) << "\n"
               << "kind       int\n"
               << "bits       " << c.bits << "\n"
               << "scheme     " << (c.symmetric ? "symmetric" : "asymmetric")
               << "\n"
               << "range      [" << detail::int_qmin(c.bits) << ", "
               << detail::int_qmax(c.bits) << "]\n"
               << "per_channel "
               << (c.per_channel ? "axis=" + std::to_string(c.axis) : "no")
               << "\n";
          },
      },
      q);
}

// -- quantize ---------------------------------------------------------------

struct QuantizeOptions {
  std::string input;
  std::string output;
  std::string format;
  int rmode = 1;
  bool no_subnormal = false;
  bool no_explim = false;
  bool flip = false;
  double p = 0.5;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t chunk_size = 1000;
};

void run_quantize(const QuantizeOptions& o) {
  const QuantizerSpec spec = parse_quantizer_spec(o.format);
  const RoundingMode mode = rounding_mode_from_code(o.rmode);
  if (o.flip && !std::holds_alternative<FloatFormat>(spec)) {
    throw UsageError("--flip requires a floating-point format");
  }
  ArrayData data = read_array_file(o.input);

  std::visit(
      overloaded{
          [&](const FloatFormat& f) {
            ChopConfig cfg;
            cfg.mode = mode;
            cfg.subnormal = !o.no_subnormal;
            cfg.explim = !o.no_explim;
            cfg.flip = o.flip;
            cfg.p = o.p;
            cfg.seed = o.seed;
            cfg.threads = o.threads;
            cfg.chunk_size = o.chunk_size;
            if (data.type == ElementType::kF32) {
              std::vector<float> v(data.values.begin(), data.values.end());
              Chop(f, cfg).apply(std::span<float>(v));
              data.values.assign(v.begin(), v.end());
            } else {
              Chop(f, cfg).apply(std::span<double>(data.values));
            }
          },
          [&](const FixedFormat& f) {
            data.values = fx_chop(data.values, f, mode, o.seed);
          },
          [&](const IntQuantConfig& c) {
            const IntQuantParams params =
                iq_calibrate(data.values, data.shape, c);
            const auto q =
                iq_quantize(data.values, data.shape, params, mode, o.seed);
            data.values = iq_dequantize(q, data.shape, params);
          },
      },
      spec);
  write_array_file(o.output, data);
}

// -- demo -------------------------------------------------------------------

struct DemoOptions {
  std::string name;
  std::string format;
  std::string output;
  std::size_t terms = 1000;
  double ratio = 0.99;
  double scale = 2.5e-6;
  std::size_t n = 200;
  double cond = 1e4;
  double tol = 1e-8;
  int max_iter = 50;
  int rmode = 1;
  std::uint64_t seed = 42;
};

void run_demo(const DemoOptions& o, std::ostream& os) {
  const RoundingMode mode = rounding_mode_from_code(o.rmode);
  if (o.name == "subnormal-sum") {
    const FloatFormat f = parse_float_format(o.format.empty() ? "fp16" : o.format);
    ChopConfig cfg;
    cfg.mode = mode;
    cfg.seed = o.seed;
    const SumTrace tr = geometric_sum_demo(f, o.terms, o.ratio, o.scale, cfg);
    if (o.output.empty()) {
      write_csv(os, tr);
    } else {
      std::ofstream out(o.output);
      if (!out) throw std::ios_base::failure("cannot open '" + o.output + "'");
      write_csv(out, tr);
      os << "wrote " << tr.n << " rows to " << o.output << "\n";
    }
    return;
  }
  if (o.name == "roundtrip") {
    const std::string spec = o.format.empty() ? "fp16" : o.format;
    const RoundtripReport r = exhaustive_roundtrip(parse_float_format(spec));
    os << "roundtrip " << spec_name(spec) << ": " << r.mismatches
       << " mismatches / " << r.finite_values << " finite values ("
       << r.checks << " checks over deterministic modes)\n";
    return;
  }
  if (o.name == "iterative-refinement") {
    RefinementOptions opt;
    opt.n = o.n;
    opt.cond = o.cond;
    opt.tol = o.tol;
    opt.max_iter = o.max_iter;
    opt.mode = mode;
    opt.seed = o.seed;
    if (!o.format.empty()) opt.format = parse_float_format(o.format);
    const IRReport r = iterative_refinement(opt);
    os << "n                    " << r.n << "\n"
       << "condition_estimate   " << num(r.condition_estimate) << "\n"
       << "native_iterations    " << r.native.iterations << "\n"
       << "emulated_iterations  " << r.emulated.iterations << "\n"
       << "native_residual      " << num(r.native.residuals.back()) << "\n"
       << "emulated_residual    " << num(r.emulated.residuals.back()) << "\n"
       << "relative_difference  " << num(r.relative_difference) << "\n"
       << "within_tolerance     "
       << (r.relative_difference <= 1e-8 ? "yes" : "no") << "\n";
    return;
  }
  throw UsageError("unknown demo '" + o.name +
                   "'; available: subnormal-sum, iterative-refinement, "
                   "roundtrip");
}

// -- bench ------------------------------------------------------------------

struct BenchOptions {
  std::size_t size = 1000000;
  std::string format = "bf16";
  int rmode = 1;
  unsigned threads = 1;
  int runs = 5;
  std::uint64_t seed = 0;
  std::size_t chunk_size = 1000;
};

void run_bench(const BenchOptions& o, std::ostream& os) {
  if (o.size < 1) throw UsageError("--size must be >= 1");
  ChopConfig cfg;
  cfg.mode = rounding_mode_from_code(o.rmode);
  cfg.threads = o.threads;
  cfg.seed = o.seed;
  cfg.chunk_size = o.chunk_size;
  const BenchReport r = bench(o.size, parse_float_format(o.format), cfg, o.runs);
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << r.checksum;
  os << "size=" << r.size << " format=" << spec_name(o.format)
     << " rmode=" << o.rmode << " threads=" << r.threads
     << " runs=" << r.timed_runs << " warmup=discarded"
     << " mean_seconds=" << num(r.mean_seconds)
     << " elements_per_second=" << num(r.elements_per_second)
     << " checksum=" << hex.str() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::locale::global(std::locale::classic());
  std::cout.imbue(std::locale::classic());

  CLI::App app{"Reduced-precision emulation: custom floating-point formats, "
               "fixed-point and integer quantization"};
  app.require_subcommand(1);

  std::string info_spec;
  auto* info = app.add_subcommand("info", "Print the parameters of a format");
  info->add_option("format", info_spec, "fp16, e5m10, q8.8, int8:sym, ...")
      ->required();

  QuantizeOptions qo;
  auto* quant = app.add_subcommand("quantize", "Quantize an array file");
  quant->add_option("input", qo.input, "Input file (binary container or CSV)")
      ->required();
  quant->add_option("output", qo.output, "Output file (same container)")
      ->required();
  quant->add_option("format", qo.format, "Target format spec")->required();
  quant->add_option("--rmode", qo.rmode, "Rounding mode 1..9");
  quant->add_flag("--no-subnormal", qo.no_subnormal, "Disable subnormals");
  quant->add_flag("--no-explim", qo.no_explim, "Disable exponent limits");
  quant->add_flag("--flip", qo.flip, "Inject significand bit flips");
  quant->add_option("--p", qo.p, "Bit-flip probability");
  quant->add_option("--seed", qo.seed, "Random seed");
  auto* qthreads = quant->add_option("--threads", qo.threads, "Worker threads");
  quant->add_option("--chunk-size", qo.chunk_size, "Elements per work unit");

  DemoOptions dopt;
  auto* demo = app.add_subcommand("demo", "Run a numerical demonstration");
  demo->add_option("name", dopt.name,
                   "subnormal-sum | iterative-refinement | roundtrip")
      ->required();
  demo->add_option("--format", dopt.format, "Target format");
  demo->add_option("--output", dopt.output, "CSV output path (subnormal-sum)");
  demo->add_option("--terms", dopt.terms, "Series length (subnormal-sum)");
  demo->add_option("--ratio", dopt.ratio, "Series ratio r (subnormal-sum)");
  demo->add_option("--scale", dopt.scale, "Series scale s (subnormal-sum)");
  demo->add_option("--n", dopt.n, "Matrix size (iterative-refinement)");
  demo->add_option("--cond", dopt.cond, "Condition number target");
  demo->add_option("--tol", dopt.tol, "Relative residual tolerance");
  demo->add_option("--max-iter", dopt.max_iter, "Refinement iteration cap");
  demo->add_option("--rmode", dopt.rmode, "Rounding mode 1..9");
  demo->add_option("--seed", dopt.seed, "Random seed");

  BenchOptions bo;
  auto* bench_cmd = app.add_subcommand("bench", "Measure rounding throughput");
  bench_cmd->add_option("--size", bo.size, "Element count");
  bench_cmd->add_option("--format", bo.format, "Target format");
  bench_cmd->add_option("--rmode", bo.rmode, "Rounding mode 1..9");
  auto* bthreads = bench_cmd->add_option("--threads", bo.threads, "Worker threads");
  bench_cmd->add_option("--runs", bo.runs, "Timed runs after the warm-up");
  bench_cmd->add_option("--seed", bo.seed, "Random seed");
  bench_cmd->add_option("--chunk-size", bo.chunk_size, "Elements per work unit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (info->parsed()) {
      print_info(info_spec, std::cout);
    } else if (quant->parsed()) {
      if (qthreads->count() == 0) qo.threads = default_threads();
      run_quantize(qo);
    } else if (demo->parsed()) {
      run_demo(dopt, std::cout);
    } else if (bench_cmd->parsed()) {
      if (bthreads->count() == 0) bo.threads = default_threads();
      run_bench(bo, std::cout);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ArrayFileError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}
