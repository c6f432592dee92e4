#include "ecosim/env/trajectory.hpp"

#include <nlohmann/json.hpp>

namespace ecosim::env {

using nlohmann::json;

void write_trajectory_record(std::ostream& out, int episode,
                             const StepOutcome& outcome,
                             const std::vector<int>& actions) {
  json j;
  j["schema_version"] = kTrajectorySchemaVersion;
  j["episode"] = episode;
  j["step"] = outcome.step;
  j["actions"] = actions;
  j["user_rewards"] = outcome.user_rewards;
  json providers = json::array();
  for (const auto& p : outcome.providers) {
    json rec_list = json::array();
    for (const auto& r : p.recommendations)
      rec_list.push_back({{"doc_id", r.doc_id},
                          {"user_id", r.user_id},
                          {"user_reward", r.user_reward}});
    providers.push_back({{"id", p.provider_id},
                         {"reward", p.reward},
                         {"satisfaction", p.satisfaction},
                         {"feedback", p.feedback},
                         {"recommendation_count", p.recommendation_count},
                         {"sum_reward", p.sum_reward},
                         {"left", p.left},
                         {"recommendations", std::move(rec_list)}});
  }
  j["providers"] = std::move(providers);
  j["providers_left"] = outcome.providers_left;
  json new_docs = json::array();
  for (const auto& d : outcome.new_documents)
    new_docs.push_back({{"id", d.id},
                        {"topic", d.topic},
                        {"quality", d.quality},
                        {"provider_id", d.provider_id},
                        {"created_at", d.created_at}});
  j["new_documents"] = std::move(new_docs);
  j["done"] = outcome.done;
  out << j.dump() << "\n";
}

}  // namespace ecosim::env
