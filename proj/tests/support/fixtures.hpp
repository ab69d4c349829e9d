#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "depscore/datasets.hpp"
#include "depscore/random.hpp"

namespace fixture {

using depscore::CheckConclusion;
using depscore::CheckRun;
using depscore::Timestamp;
using depscore::UpdateEvent;

inline Timestamp at_hour(long hours) {
    return Timestamp{std::chrono::sys_days{std::chrono::year{2022} / 3 / 1}} + std::chrono::hours(hours);
}

struct EventBuilder {
    UpdateEvent e;

    EventBuilder(std::string client, std::string provider, std::string origin, std::string target, long hour) {
        e.client = std::move(client);
        e.ecosystem = "npm";
        e.provider = std::move(provider);
        e.origin = std::move(origin);
        e.target = std::move(target);
        e.opened_at = at_hour(hour);
        e.checks = {{"build", CheckConclusion::Success}};
    }

    EventBuilder& failing() {
        e.checks = {{"build", CheckConclusion::Failure}};
        return *this;
    }
    EventBuilder& no_ci() {
        e.checks.clear();
        return *this;
    }
    EventBuilder& base_failing() {
        e.base_ci_passing = false;
        return *this;
    }
    EventBuilder& merged(bool by_human = true) {
        e.merged = true;
        e.merged_by_human = by_human;
        e.closed_at = e.opened_at + std::chrono::hours(1);
        return *this;
    }
    EventBuilder& ecosystem(std::string eco) {
        e.ecosystem = std::move(eco);
        return *this;
    }
    operator UpdateEvent() const { return e; }
};

inline EventBuilder event(std::string client, std::string provider, std::string origin, std::string target,
                          long hour) {
    return EventBuilder(std::move(client), std::move(provider), std::move(origin), std::move(target), hour);
}

/// Small random corpus over a handful of clients, providers and versions,
/// including a few unparseable version strings.
inline std::vector<UpdateEvent> random_events(depscore::Rng& rng, std::size_t count, long hour_span = 200) {
    static const std::vector<std::string> versions{"1.0.0", "1.0.1", "1.1.0", "1.1.3", "1.2",   "2.0.0",
                                                   "2.0.4", "2.1.0", "v2.1.1", "3.0.0", "nightly", "1.0.0-rc.1"};
    std::vector<UpdateEvent> out;
    for (std::size_t i = 0; i < count; ++i) {
        const auto client = "c" + std::to_string(depscore::uniform_index(rng, 5));
        const auto provider = "p" + std::to_string(depscore::uniform_index(rng, 3));
        const auto& origin = versions[depscore::uniform_index(rng, versions.size())];
        const auto& target = versions[depscore::uniform_index(rng, versions.size())];
        auto b = event(client, provider, origin, target,
                       static_cast<long>(depscore::uniform_index(rng, static_cast<std::uint64_t>(hour_span))));
        const auto kind = depscore::uniform_index(rng, 10);
        if (kind == 0) b.no_ci();
        if (kind == 1) b.base_failing();
        if (kind >= 2 && kind <= 4) b.failing();
        if (depscore::bernoulli(rng, 0.5)) b.merged(depscore::bernoulli(rng, 0.8));
        out.push_back(b);
    }
    return out;
}

}  // namespace fixture
