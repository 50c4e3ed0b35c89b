#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "podcorpus/analytics.hpp"
#include "podcorpus/feed_ingest.hpp"
#include "podcorpus/guest_network.hpp"
#include "podcorpus/pipeline.hpp"
#include "podcorpus/role_inference.hpp"
#include "podcorpus/text.hpp"
#include "podcorpus/transcript_quality.hpp"

namespace py = pybind11;
using namespace podcorpus;

namespace {

py::dict episode_dict(const feed::IngestedEpisode& e) {
  py::dict d;
  d["episode_id"] = e.meta.episode_id;
  d["title"] = e.meta.title;
  d["publication_date"] = e.meta.publication_date ? py::object(py::str(e.meta.publication_date->to_iso()))
                                                  : py::object(py::none());
  d["duration_s"] = e.meta.duration_s;
  d["language"] = e.meta.language;
  d["flags"] = e.flags;
  return d;
}

py::dict stage_dict(const pipeline::StageManifest& m) {
  py::dict d;
  d["stage"] = std::string(pipeline::to_string(m.stage));
  d["input"] = m.input;
  d["retained"] = m.retained;
  d["rejected"] = m.rejected;
  d["seconds"] = m.seconds;
  d["stats"] = m.stats;
  return d;
}

}  // namespace

PYBIND11_MODULE(_podcorpus, m) {
  m.doc() = "podcast corpus analysis core";
  m.attr("__version__") = "0.1.0";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "PodcorpusError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<pipeline::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("normalize_word", &text::normalize_word, py::arg("token"));

  m.def(
      "parse_feed",
      [](const std::string& xml, const std::string& podcast_id, const std::string& feed_url) {
        auto parsed = feed::parse_feed({xml, ""}, podcast_id, feed_url);
        py::dict d;
        d["podcast_id"] = parsed.podcast.podcast_id;
        d["title"] = parsed.podcast.title;
        d["category"] = parsed.podcast.category;
        d["hosting_platform"] = parsed.podcast.hosting_platform;
        d["language"] = parsed.podcast.language;
        py::list eps;
        for (const auto& e : parsed.episodes) eps.append(episode_dict(e));
        d["episodes"] = eps;
        return d;
      },
      py::arg("xml"), py::arg("podcast_id"), py::arg("feed_url") = "");

  m.def(
      "fourgram_ratio",
      [](const std::vector<std::string>& tokens) { return quality::fourgram_repetition_score(tokens).ratio; },
      py::arg("tokens"), "Count of the most frequent 4-gram over the number of 4-grams.");

  m.def(
      "modularity",
      [](std::size_t nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
         const std::vector<std::size_t>& community) {
        return network::modularity(network::GuestGraph::from_edges(nodes, edges),
                                   network::Partition{community});
      },
      py::arg("nodes"), py::arg("edges"), py::arg("community"));

  m.def("krippendorff_alpha", &roles::krippendorff_alpha, py::arg("annotations"),
        "Nominal alpha; rows are items, columns coders, None marks a missing label.");

  m.def(
      "contains_phrase",
      [](const std::string& transcript, const std::string& phrase) {
        auto toks = text::normalize_words(transcript);
        auto p = text::normalize_words(phrase);
        return analytics::contains_phrase(toks, p);
      },
      py::arg("transcript"), py::arg("phrase"));

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> work_dir,
         const std::string& start) {
        auto cfg = pipeline::PipelineConfig::load(config);
        if (work_dir) cfg.work_dir = *work_dir;
        pipeline::RunManifest run;
        {
          py::gil_scoped_release release;
          run = pipeline::run_pipeline(cfg, pipeline::parse_stage(start));
        }
        py::list out;
        for (const auto& s : run.stages) out.append(stage_dict(s));
        return out;
      },
      py::arg("config"), py::arg("work_dir") = py::none(), py::arg("start") = "ingest",
      "Runs the pipeline from a JSON config; returns one dict per stage.");

  m.def(
      "config_hash", [](const std::filesystem::path& config) { return pipeline::PipelineConfig::load(config).hash(); },
      py::arg("config"));
}
