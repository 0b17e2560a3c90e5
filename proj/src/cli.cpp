// Copyright 2026 the dsslic authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsslic/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "dsslic/codec.hpp"
#include "dsslic/evaluation.hpp"
#include "dsslic/training.hpp"

namespace dsslic {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string backend_flif, backend_bpg, backend_bpgdec;
  int jobs = 0;
  uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--backend-flif", o->backend_flif, "flif binary for the lossless layers");
  cmd->add_option("--backend-bpg", o->backend_bpg, "bpgenc binary for the residual layer");
  cmd->add_option("--backend-bpgdec", o->backend_bpgdec, "bpgdec binary (defaults to 'bpgdec')");
  cmd->add_option("--jobs", o->jobs, "worker threads for the network math");
  cmd->add_option("--seed", o->seed, "seed for every random choice");
}

BackendRegistry make_registry(const CommonOpts& o) {
  return BackendRegistry(o.backend_flif, o.backend_bpg, o.backend_bpgdec);
}

void apply_jobs(const CommonOpts& o) {
  if (o.jobs > 0) set_num_threads(o.jobs);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string tok = s.substr(pos, comma - pos);
    if (!tok.empty()) out.push_back(tok);
    pos = comma + 1;
  }
  return out;
}

std::vector<int> split_csv_int(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split_csv(s)) out.push_back(std::stoi(t));
  return out;
}

// ---------------------------------------------------------------------------

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const CommonOpts& common) {
  apply_jobs(common);
  Config c = Config::from_file(config_path);
  c.apply_overrides(overrides);
  TrainingConfig cfg = TrainingConfig::from_config(c);

  IngestResult data = ingest_dataset(cfg.dataset_root, cfg.resize_rule, cfg.num_labels,
                                     variant_uses_seg(cfg.variant));
  if (data.skipped_unpaired > 0)
    std::cerr << "warning: skipped " << data.skipped_unpaired << " unpaired file(s)\n";
  if (data.skipped_filtered > 0)
    std::cerr << "note: " << data.skipped_filtered << " image(s) below the size threshold\n";
  if (data.skipped_mismatched > 0)
    std::cerr << "warning: skipped " << data.skipped_mismatched << " mismatched pair(s)\n";

  NetworkBundle nets = NetworkBundle::build(cfg.variant, cfg.num_labels, cfg.alpha, cfg.seed);
  std::unique_ptr<FeatureExtractor> extractor;
  if (cfg.extractor == "vgg") {
    if (cfg.vgg_weights.empty()) throw DataError("extractor=vgg requires vgg_weights=<path>");
    extractor = std::make_unique<VggExtractor>(VggExtractor::from_weights(cfg.vgg_weights));
  } else {
    extractor = std::make_unique<IdentityExtractor>();
  }

  Trainer trainer(cfg, &nets, extractor.get());
  TrainResult res = trainer.train(data.items);
  std::cout << "trained " << res.epochs_run << " epoch(s), " << res.history.size() << " step(s)\n"
            << "weights: " << res.weights_path << "\n"
            << "loss history: " << cfg.out_dir << "/loss_history.csv\n";
  return 0;
}

int cmd_encode(const std::string& input, const std::string& weights_path, const std::string& out,
               int quality, bool no_residual, const std::string& seg_dir, int alpha_flag,
               const CommonOpts& common) {
  apply_jobs(common);
  ImageU8 x = load_image(input);
  NetworkBundle nets = NetworkBundle::load(weights_path);
  if (alpha_flag > 0 && alpha_flag != nets.alpha)
    throw DataError("--alpha disagrees with the weights (" + std::to_string(nets.alpha) + ")");

  BackendRegistry registry = make_registry(common);
  Pipeline pipe(&nets, &registry);
  pipe.quality = quality;
  pipe.include_residual = !no_residual;
  SegnetAdapter adapter = SegnetAdapter::from_directory(seg_dir, nets.num_labels);
  if (variant_uses_seg(nets.variant)) {
    if (seg_dir.empty()) throw DataError("these weights need --seg-dir with precomputed maps");
    pipe.segnet = &adapter;
  }

  std::string id = fs::path(input).stem().string();
  LayeredBitstream b = pipe.encode(x, id);
  write_container(out, b);

  LayerBreakdown lb = layer_breakdown(b);
  std::cout << "wrote " << out << "\n"
            << "  header:       " << lb.header_bytes << " bytes\n"
            << "  segmentation: " << lb.seg_bytes << " bytes\n"
            << "  compact:      " << lb.compact_bytes << " bytes\n"
            << "  residual:     " << lb.residual_bytes << " bytes\n"
            << "  total:        " << lb.total() << " bytes\n";
  char line[64];
  std::snprintf(line, sizeof(line), "  bpp:          %.6f\n",
                bpp(lb.total(), x.h, x.w, x.k));
  std::cout << line;
  return 0;
}

int cmd_decode(const std::string& input, const std::string& weights_path, const std::string& out,
               bool resilient, const CommonOpts& common) {
  apply_jobs(common);
  NetworkBundle nets = NetworkBundle::load(weights_path);
  BackendRegistry registry = make_registry(common);
  Pipeline pipe(&nets, &registry);

  std::ifstream f(input, std::ios::binary);
  if (!f) throw DataError("cannot open container: " + input);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  DecodeResult r = pipe.decode_bytes(bytes, resilient ? ParseMode::kResilient : ParseMode::kStrict);
  if (r.residual_dropped)
    std::cerr << "warning: residual layer truncated; emitting the coarse reconstruction\n";
  save_image(out, r.image);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& dataset, const std::string& dataset_name,
             const std::string& codecs_csv, const std::string& qualities_csv,
             const std::string& weights_path, const std::string& seg_dir, const std::string& out,
             const CommonOpts& common) {
  apply_jobs(common);
  std::vector<std::string> codecs = split_csv(codecs_csv);
  std::vector<int> qualities = split_csv_int(qualities_csv);
  if (codecs.empty() || qualities.empty())
    throw UsageError("eval needs --codecs and --qualities");
  fs::create_directories(out);

  // Test images come straight from the dataset directory, unresized.
  IngestResult data = ingest_dataset(dataset, ResizeRule::kNone, 255, /*require_labels=*/false);
  std::vector<ImageU8> images;
  std::vector<std::string> ids;
  for (auto& item : data.items) {
    images.push_back(std::move(item.image));
    ids.push_back(item.id);
  }

  BackendRegistry registry = make_registry(common);
  BaselinePaths bpaths{common.backend_bpg, common.backend_bpgdec};

  std::optional<NetworkBundle> nets;
  std::optional<Pipeline> pipe;
  std::optional<SegnetAdapter> adapter;

  std::vector<RDCurve> curves;
  int failures = 0;
  for (const auto& codec : codecs) {
    RDCurve curve;
    if (codec == "dsslic") {
      if (weights_path.empty()) throw DataError("codec dsslic needs --weights");
      nets = NetworkBundle::load(weights_path);
      pipe.emplace(&*nets, &registry);
      if (variant_uses_seg(nets->variant)) {
        std::string dir = seg_dir.empty() ? dataset + "/labels" : seg_dir;
        adapter.emplace(SegnetAdapter::from_directory(dir, nets->num_labels));
        pipe->segnet = &*adapter;
      }
      curve = sweep_rd(images, pipeline_codec_fn(&*pipe, ids), codec, dataset_name, qualities);
    } else {
      curve = sweep_rd(images, baseline_codec_fn(codec, bpaths), codec, dataset_name, qualities);
    }
    for (const auto& fmsg : curve.failures) std::cerr << "warning: " << fmsg << "\n";
    if (curve.points.empty()) {
      std::cerr << "warning: codec " << codec << " produced no points\n";
      ++failures;
      continue;
    }
    write_rd_csv(out + "/rd_" + codec + ".csv", curve);
    curves.push_back(std::move(curve));
  }
  if (curves.empty()) {
    std::cerr << "error: every codec failed\n";
    return 3;
  }
  write_rd_plot_svg(out + "/rd_psnr.svg", curves, "psnr");
  write_rd_plot_svg(out + "/rd_msssim.svg", curves, "msssim");
  std::cout << "wrote " << curves.size() << " curve(s) to " << out << "\n";
  return failures > 0 ? 3 : 0;
}

int cmd_ablate(const std::string& dataset, const std::map<Variant, std::string>& weights,
               const std::string& seg_dir, const std::string& out, const CommonOpts& common) {
  apply_jobs(common);
  fs::create_directories(out);
  IngestResult data = ingest_dataset(dataset, ResizeRule::kNone, 255, /*require_labels=*/false);
  std::vector<ImageU8> images;
  std::vector<std::string> ids;
  for (auto& item : data.items) {
    images.push_back(std::move(item.image));
    ids.push_back(item.id);
  }

  BackendRegistry registry = make_registry(common);
  int num_labels = 0;
  for (const auto& [v, path] : weights)
    if (!path.empty()) num_labels = NetworkBundle::load(path).num_labels;
  std::string dir = seg_dir.empty() ? dataset + "/labels" : seg_dir;
  SegnetAdapter adapter = SegnetAdapter::from_directory(dir, std::max(num_labels, 1));

  AblationTable table = ablation_table(images, ids, weights, &adapter, registry);
  for (const auto& note : table.notes) std::cerr << "note: " << note << "\n";
  write_ablation_csv(out + "/ablation.csv", table);

  std::cout << "metric";
  for (const auto& c : table.columns) std::cout << "\t" << variant_name(c.variant);
  std::cout << "\n";
  auto print_row = [&](const char* name, auto get) {
    std::cout << name;
    for (const auto& c : table.columns) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "\t%.4f", get(c));
      std::cout << buf;
    }
    std::cout << "\n";
  };
  print_row("bpp", [](const AblationColumn& c) { return c.bpp; });
  print_row("psnr", [](const AblationColumn& c) { return c.psnr; });
  print_row("msssim", [](const AblationColumn& c) { return c.msssim; });
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"layered semantic-segmentation image codec"};
  app.require_subcommand(1);

  CommonOpts common;

  // train
  auto* train = app.add_subcommand("train", "train a model from a config file");
  std::string config_path;
  std::vector<std::string> overrides;
  train->add_option("--config", config_path, "key = value config file")->required();
  train->add_option("--set", overrides, "override config entries (key=value)");
  add_common(train, &common);

  // encode
  auto* enc = app.add_subcommand("encode", "encode an image into a layered container");
  std::string in_path, weights_path, out_path, seg_dir;
  int quality = 28, alpha_flag = 0;
  bool no_residual = false;
  enc->add_option("--input", in_path, "input image")->required();
  enc->add_option("--weights", weights_path, "trained weights")->required();
  enc->add_option("--out", out_path, "output container")->required();
  enc->add_option("--quality", quality, "residual-layer quality (0..51, lower is better)");
  enc->add_option("--seg-dir", seg_dir, "directory of precomputed segmentation maps");
  enc->add_option("--alpha", alpha_flag, "expected downsampling factor (checked against weights)");
  enc->add_flag("--no-residual", no_residual, "skip the residual layer");
  add_common(enc, &common);

  // decode
  auto* dec = app.add_subcommand("decode", "decode a layered container");
  bool resilient = false, strict = false;
  dec->add_option("--input", in_path, "input container")->required();
  dec->add_option("--weights", weights_path, "trained weights")->required();
  dec->add_option("--out", out_path, "output image")->required();
  dec->add_flag("--resilient", resilient, "tolerate a truncated residual layer");
  dec->add_flag("--strict", strict, "fail on any corruption (default)");
  add_common(dec, &common);

  // eval
  auto* ev = app.add_subcommand("eval", "rate-distortion sweep over codecs");
  std::string dataset, dataset_name = "dataset", codecs_csv = "dsslic", qualities_csv;
  ev->add_option("--dataset", dataset, "directory with images/ (and labels/)")->required();
  ev->add_option("--dataset-name", dataset_name, "name recorded in the CSVs");
  ev->add_option("--codecs", codecs_csv, "comma list: dsslic,jpeg,jpeg2000,webp,bpg");
  ev->add_option("--qualities", qualities_csv, "comma list of quality settings")->required();
  ev->add_option("--weights", weights_path, "weights for the dsslic codec");
  ev->add_option("--seg-dir", seg_dir, "segmentation maps (default: <dataset>/labels)");
  ev->add_option("--out", out_path, "output directory")->required();
  add_common(ev, &common);

  // ablate
  auto* ab = app.add_subcommand("ablate", "variant comparison table");
  std::string w_upcomp, w_synth, w_noseg, w_withseg;
  ab->add_option("--dataset", dataset, "directory with images/ (and labels/)")->required();
  ab->add_option("--weights-upComp", w_upcomp, "upComp weights");
  ab->add_option("--weights-synth", w_synth, "synth weights");
  ab->add_option("--weights-noSeg", w_noseg, "noSeg weights");
  ab->add_option("--weights-withSeg", w_withseg, "withSeg weights");
  ab->add_option("--seg-dir", seg_dir, "segmentation maps (default: <dataset>/labels)");
  ab->add_option("--out", out_path, "output directory")->required();
  add_common(ab, &common);

  std::vector<std::string> argv(args);
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*train) return cmd_train(config_path, overrides, common);
    if (*enc)
      return cmd_encode(in_path, weights_path, out_path, quality, no_residual, seg_dir, alpha_flag,
                        common);
    if (*dec) return cmd_decode(in_path, weights_path, out_path, resilient && !strict, common);
    if (*ev)
      return cmd_eval(dataset, dataset_name, codecs_csv, qualities_csv, weights_path, seg_dir,
                      out_path, common);
    if (*ab) {
      std::map<Variant, std::string> weights = {{Variant::kUpComp, w_upcomp},
                                                {Variant::kSynth, w_synth},
                                                {Variant::kNoSeg, w_noseg},
                                                {Variant::kWithSeg, w_withseg}};
      return cmd_ablate(dataset, weights, seg_dir, out_path, common);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const BackendError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace dsslic
