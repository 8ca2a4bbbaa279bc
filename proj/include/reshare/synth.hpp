#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reshare/reconstruct.hpp"
#include "reshare/types.hpp"

namespace reshare {

enum class FollowerLaw { LogNormal, PowerLaw };
enum class AttachmentModel { Pdi, Uniform };

struct SynthConfig {
  std::size_t n_cascades = 100;
  std::size_t n_users = 0;  // 0 picks max(200, 5 * n_cascades)

  // Cascade sizes: P(s) proportional to s^-size_exponent on [min_size, max_size].
  double size_exponent = 2.0;
  std::size_t min_size = 2;
  std::size_t max_size = 300;

  FollowerLaw follower_law = FollowerLaw::LogNormal;
  double follower_mu = 5.0;  // lognormal location of log(followers)
  double follower_sigma = 2.0;
  double follower_exponent = 2.0;  // power-law tail exponent
  double follower_xmin = 10.0;

  // Inter-event gaps: continuous power law with density exponent
  // gap_exponent above gap_min seconds, floored to whole seconds.
  double gap_exponent = 2.0;
  double gap_min = 1.0;

  AttachmentModel model = AttachmentModel::Pdi;
  PdiParams generative{0.5, 2.0, 1.0};

  double follow_probability = 0.05;  // extra follows between co-participants
  bool root_by_followers = true;     // originators drawn in proportion to followers
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruthCascade {
  Cascade cascade;
  CascadeTree truth;
  std::vector<std::pair<std::string, std::string>> follows;  // among this cascade's users
};

struct SynthCorpus {
  std::vector<GroundTruthCascade> cascades;
  FollowerGraph followers;

  std::vector<Cascade> corpus() const;
  std::vector<CascadeTree> truths() const;
};

/// Grows each cascade event by event: size, users, gaps, then a parent drawn
/// from the configured attachment model. Cascade c draws from
/// make_stream(seed, "synth-cascade", c), so output depends only on the config.
SynthCorpus generate_corpus(const SynthConfig& config, unsigned workers = 1);

/// Fraction of reshares whose inferred parent is the true parent.
double recovery_score(const CascadeTree& truth, const CascadeTree& inferred);

/// Expected recovery of uniform parent guessing on a cascade of `size` events.
double random_recovery_baseline(std::size_t size);

}  // namespace reshare
