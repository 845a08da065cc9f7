// SPDX-License-Identifier: Apache-2.0
//
// sixdma - hybrid-field channel modelling and estimation for 6D movable antennas
// Copyright (C) 2026 The sixdma authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "sixdma/experiment.hpp"
#include "sixdma/parallel.hpp"
#include "sixdma/pilot.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace sixdma
{
    using json = nlohmann::ordered_json;

    // ---- Names ----

    const char *to_string(ExperimentKind kind)
    {
        switch (kind)
        {
        case ExperimentKind::sparsity_map:
            return "sparsity-map";
        case ExperimentKind::capacity_vs_distance:
            return "capacity-vs-distance";
        case ExperimentKind::mse_vs_snr:
            return "mse-vs-snr";
        case ExperimentKind::single_run:
            return "single-run";
        }
        return "unknown";
    }

    ExperimentKind parse_experiment_kind(const std::string &name)
    {
        for (auto k : {ExperimentKind::sparsity_map, ExperimentKind::capacity_vs_distance, ExperimentKind::mse_vs_snr,
                       ExperimentKind::single_run})
            if (name == to_string(k))
                return k;
        throw ConfigError("kind: unknown experiment kind '" + name +
                          "' (expected sparsity-map, capacity-vs-distance, mse-vs-snr or single-run)");
    }

    namespace
    {
        const char *to_string(NearFieldGain g)
        {
            return g == NearFieldGain::common ? "common" : "free_space_taper";
        }
    }

    // ---- Scenario helpers ----

    AntennaPattern PatternConfig::build() const
    {
        AntennaPattern p = kind == "isotropic"
                               ? AntennaPattern::isotropic()
                               : AntennaPattern::directive(max_gain_dbi, theta_3db_deg * pi / 180.0,
                                                           phi_3db_deg * pi / 180.0, side_lobe_limit_db,
                                                           max_attenuation_db);
        if (sparsity_floor_dbi)
            p.set_sparsity_floor(*sparsity_floor_dbi);
        return p;
    }

    CarrierConfig ScenarioConfig::carrier() const
    {
        CarrierConfig c;
        c.frequency = carrier_frequency;
        return c;
    }

    SiteSpace ScenarioConfig::site() const
    {
        SiteSpace s;
        s.side_length = site_side_length;
        return s;
    }

    UserRegion ScenarioConfig::region() const
    {
        return {distance_min, distance_max, upper_half_space, path_phase};
    }

    ArrayLayout ScenarioConfig::layout() const
    {
        return ArrayLayout::upa(N, antenna_spacing.value_or(0.5 * carrier().wavelength()));
    }

    EstimatorModel ScenarioConfig::model() const
    {
        return {layout(), carrier(), pattern.build()};
    }

    // ---- Configuration ----

    ExperimentConfig default_config(ExperimentKind kind)
    {
        ExperimentConfig c;
        c.kind = kind;
        c.trials = (kind == ExperimentKind::sparsity_map || kind == ExperimentKind::single_run) ? 1 : 100;
        return c;
    }

    void ExperimentConfig::validate() const
    {
        auto fail = [](const std::string &key, const std::string &what)
        { throw ConfigError(key + ": " + what); };
        const auto &s = scenario;
        if (s.B == 0)
            fail("scenario.B", "must be at least 1");
        if (s.N == 0)
            fail("scenario.N", "must be at least 1");
        if (s.K == 0)
            fail("scenario.K", "must be at least 1");
        if (s.M == 0)
            fail("scenario.M", "must be at least 1");
        if (s.T == 0)
            fail("scenario.T", "must be at least 1");
        if (s.B > s.M)
            fail("scenario.B", "must not exceed scenario.M");
        if (!(s.site_side_length > 0.0))
            fail("scenario.site_side_length", "must be positive");
        if (!(s.carrier_frequency > 0.0))
            fail("scenario.carrier_frequency", "must be positive");
        if (s.antenna_spacing && !(*s.antenna_spacing > 0.0))
            fail("scenario.antenna_spacing", "must be positive");
        if (!(s.distance_min > 0.0))
            fail("scenario.distance_min", "must be positive");
        if (!(s.distance_max >= s.distance_min))
            fail("scenario.distance_max", "must be at least scenario.distance_min");
        if (s.pattern.kind != "directive" && s.pattern.kind != "isotropic")
            fail("scenario.pattern.kind", "must be 'directive' or 'isotropic'");
        if (!(s.pattern.theta_3db_deg > 0.0))
            fail("scenario.pattern.theta_3db_deg", "must be positive");
        if (!(s.pattern.phi_3db_deg > 0.0))
            fail("scenario.pattern.phi_3db_deg", "must be positive");
        if (trials == 0)
            fail("trials", "must be at least 1");
        if (grid.preset != "desk" && grid.preset != "paper" && grid.preset != "custom")
            fail("grid.preset", "must be 'desk', 'paper' or 'custom'");
        try
        {
            grid.coarse.validate();
        }
        catch (const std::invalid_argument &e)
        {
            fail("grid.coarse", e.what());
        }
        try
        {
            grid.fine.validate(grid.coarse);
        }
        catch (const std::invalid_argument &e)
        {
            fail("grid.fine", e.what());
        }
        if (grid.epsilon && !(*grid.epsilon > 0.0))
            fail("grid.epsilon", "must be positive");
        if (capacity.distances.empty())
            fail("capacity.distances", "must not be empty");
        for (double d : capacity.distances)
            if (!(d > s.site_side_length))
                fail("capacity.distances", "every distance must exceed the site size");
        if (mse.snr_db.empty())
            fail("mse.snr_db", "must not be empty");
        for (auto m : mse.m_values)
            if (m == 0)
                fail("mse.m_values", "entries must be at least 1");
        if (mse.held_out_poses == 0)
            fail("mse.held_out_poses", "must be at least 1");
    }

    namespace
    {
        // Reads the members of one JSON object and rejects anything it did not ask for
        class ObjectReader
        {
        public:
            ObjectReader(const json &obj, std::string path) : obj_(obj), path_(std::move(path))
            {
                if (!obj_.is_object())
                    throw ConfigError(name_or_root() + ": expected an object");
            }

            ~ObjectReader() noexcept(false)
            {
                if (std::uncaught_exceptions() > 0)
                    return;
                for (auto it = obj_.begin(); it != obj_.end(); ++it)
                    if (!seen_.count(it.key()))
                        throw ConfigError(key(it.key()) + ": unknown key");
            }

            const json *find(const std::string &k)
            {
                seen_.insert(k);
                auto it = obj_.find(k);
                return it == obj_.end() ? nullptr : &*it;
            }

            template <typename T>
            void read(const std::string &k, T &target)
            {
                if (const json *v = find(k))
                    target = convert<T>(*v, key(k));
            }

            template <typename T>
            void read(const std::string &k, std::optional<T> &target)
            {
                if (const json *v = find(k))
                    target = v->is_null() ? std::nullopt : std::optional<T>(convert<T>(*v, key(k)));
            }

            std::string key(const std::string &k) const { return path_.empty() ? k : path_ + "." + k; }

            template <typename T>
            static T convert(const json &v, const std::string &where)
            {
                try
                {
                    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>)
                    {
                        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0 && !v.is_number_unsigned()))
                            throw ConfigError(where + ": expected a non-negative integer");
                    }
                    else if constexpr (std::is_same_v<T, double>)
                    {
                        if (!v.is_number())
                            throw ConfigError(where + ": expected a number");
                    }
                    return v.get<T>();
                }
                catch (const json::exception &e)
                {
                    throw ConfigError(where + ": " + e.what());
                }
            }

        private:
            std::string name_or_root() const { return path_.empty() ? "<root>" : path_; }

            const json &obj_;
            std::string path_;
            std::set<std::string> seen_;
        };

        AxisRange read_axis(const json &v, const std::string &where)
        {
            if (!v.is_array() || v.size() != 3)
                throw ConfigError(where + ": expected [lo, hi, step]");
            return {ObjectReader::convert<double>(v[0], where), ObjectReader::convert<double>(v[1], where),
                    ObjectReader::convert<double>(v[2], where)};
        }

        json axis_json(const AxisRange &a)
        {
            return json::array({a.lo, a.hi, a.step});
        }
    }

    ExperimentConfig parse_config(const std::string &json_text)
    {
        json root;
        try
        {
            root = json::parse(json_text, nullptr, true, true);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigError(std::string("<root>: parse error: ") + e.what());
        }
        if (root.is_null())
            root = json::object();

        ExperimentConfig c;
        {
            ObjectReader r(root, "");
            std::string kind = to_string(c.kind);
            r.read("kind", kind);
            c = default_config(parse_experiment_kind(kind));
            r.read("seed", c.seed);
            r.read("trials", c.trials);
            r.read("threads", c.threads);
            r.read("output_dir", c.output_dir);

            if (const json *s = r.find("scenario"))
            {
                ObjectReader rs(*s, "scenario");
                auto &sc = c.scenario;
                rs.read("B", sc.B);
                rs.read("N", sc.N);
                rs.read("K", sc.K);
                rs.read("M", sc.M);
                rs.read("T", sc.T);
                rs.read("site_side_length", sc.site_side_length);
                rs.read("carrier_frequency", sc.carrier_frequency);
                rs.read("antenna_spacing", sc.antenna_spacing);
                rs.read("distance_min", sc.distance_min);
                rs.read("distance_max", sc.distance_max);
                rs.read("upper_half_space", sc.upper_half_space);
                rs.read("path_phase", sc.path_phase);
                std::string gain = to_string(sc.near_field_gain);
                rs.read("near_field_gain", gain);
                if (gain == "common")
                    sc.near_field_gain = NearFieldGain::common;
                else if (gain == "free_space_taper")
                    sc.near_field_gain = NearFieldGain::free_space_taper;
                else
                    throw ConfigError("scenario.near_field_gain: must be 'common' or 'free_space_taper'");
                if (const json *p = rs.find("pattern"))
                {
                    ObjectReader rp(*p, "scenario.pattern");
                    auto &pc = sc.pattern;
                    rp.read("kind", pc.kind);
                    rp.read("max_gain_dbi", pc.max_gain_dbi);
                    rp.read("theta_3db_deg", pc.theta_3db_deg);
                    rp.read("phi_3db_deg", pc.phi_3db_deg);
                    rp.read("side_lobe_limit_db", pc.side_lobe_limit_db);
                    rp.read("max_attenuation_db", pc.max_attenuation_db);
                    rp.read("sparsity_floor_dbi", pc.sparsity_floor_dbi);
                }
            }

            // Preset first, explicit values on top
            const json *g = r.find("grid");
            json empty = json::object();
            ObjectReader rg(g ? *g : empty, "grid");
            rg.read("preset", c.grid.preset);
            if (c.grid.preset == "paper")
            {
                c.grid.coarse = GridSpec::paper(c.scenario.carrier());
                c.grid.fine = FineGridSpec::paper(c.scenario.carrier());
            }
            else if (c.grid.preset != "desk" && c.grid.preset != "custom")
                throw ConfigError("grid.preset: must be 'desk', 'paper' or 'custom'");
            if (const json *cg = rg.find("coarse"))
            {
                ObjectReader rc(*cg, "grid.coarse");
                if (const json *v = rc.find("distance"))
                    c.grid.coarse.distance = read_axis(*v, "grid.coarse.distance");
                if (const json *v = rc.find("azimuth"))
                    c.grid.coarse.azimuth = read_axis(*v, "grid.coarse.azimuth");
                if (const json *v = rc.find("elevation"))
                    c.grid.coarse.elevation = read_axis(*v, "grid.coarse.elevation");
            }
            if (const json *fg = rg.find("fine"))
            {
                ObjectReader rf(*fg, "grid.fine");
                auto &f = c.grid.fine;
                rf.read("distance_span", f.distance_span);
                rf.read("azimuth_span", f.azimuth_span);
                rf.read("elevation_span", f.elevation_span);
                rf.read("distance_step", f.distance_step);
                rf.read("azimuth_step", f.azimuth_step);
                rf.read("elevation_step", f.elevation_step);
                rf.read("widen_azimuth", f.widen_azimuth);
            }
            rg.read("epsilon", c.grid.epsilon);
            c.grid.fine.distance_origin = c.grid.coarse.distance.lo;
            c.grid.fine.azimuth_origin = c.grid.coarse.azimuth.lo;
            c.grid.fine.elevation_origin = c.grid.coarse.elevation.lo;

            if (const json *cap = r.find("capacity"))
            {
                ObjectReader rc(*cap, "capacity");
                rc.read("distances", c.capacity.distances);
                rc.read("rho_db", c.capacity.rho_db);
            }
            if (const json *m = r.find("mse"))
            {
                ObjectReader rm(*m, "mse");
                rm.read("snr_db", c.mse.snr_db);
                rm.read("m_values", c.mse.m_values);
                rm.read("held_out_poses", c.mse.held_out_poses);
                rm.read("include_ls", c.mse.include_ls);
            }
        }
        c.validate();
        return c;
    }

    ExperimentConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("<file>: cannot open config file '" + path.string() + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str());
    }

    namespace
    {
        json optional_json(const std::optional<double> &v)
        {
            return v ? json(*v) : json(nullptr);
        }

        json config_json(const ExperimentConfig &c, bool include_execution)
        {
            const auto &s = c.scenario;
            json j;
            j["kind"] = to_string(c.kind);
            j["seed"] = c.seed;
            j["trials"] = c.trials;
            if (include_execution)
            {
                j["threads"] = c.threads;
                j["output_dir"] = c.output_dir;
            }
            j["scenario"] = {
                {"B", s.B},
                {"N", s.N},
                {"K", s.K},
                {"M", s.M},
                {"T", s.T},
                {"site_side_length", s.site_side_length},
                {"carrier_frequency", s.carrier_frequency},
                {"antenna_spacing", optional_json(s.antenna_spacing)},
                {"distance_min", s.distance_min},
                {"distance_max", s.distance_max},
                {"upper_half_space", s.upper_half_space},
                {"path_phase", s.path_phase},
                {"near_field_gain", to_string(s.near_field_gain)},
                {"pattern",
                 {{"kind", s.pattern.kind},
                  {"max_gain_dbi", s.pattern.max_gain_dbi},
                  {"theta_3db_deg", s.pattern.theta_3db_deg},
                  {"phi_3db_deg", s.pattern.phi_3db_deg},
                  {"side_lobe_limit_db", s.pattern.side_lobe_limit_db},
                  {"max_attenuation_db", s.pattern.max_attenuation_db},
                  {"sparsity_floor_dbi", optional_json(s.pattern.sparsity_floor_dbi)}}}};
            const auto &f = c.grid.fine;
            j["grid"] = {
                {"preset", c.grid.preset},
                {"coarse",
                 {{"distance", axis_json(c.grid.coarse.distance)},
                  {"azimuth", axis_json(c.grid.coarse.azimuth)},
                  {"elevation", axis_json(c.grid.coarse.elevation)}}},
                {"fine",
                 {{"distance_span", f.distance_span},
                  {"azimuth_span", f.azimuth_span},
                  {"elevation_span", f.elevation_span},
                  {"distance_step", f.distance_step},
                  {"azimuth_step", f.azimuth_step},
                  {"elevation_step", f.elevation_step},
                  {"widen_azimuth", f.widen_azimuth}}},
                {"epsilon", optional_json(c.grid.epsilon)}};
            j["capacity"] = {{"distances", c.capacity.distances}, {"rho_db", c.capacity.rho_db}};
            j["mse"] = {{"snr_db", c.mse.snr_db},
                        {"m_values", c.mse.m_values},
                        {"held_out_poses", c.mse.held_out_poses},
                        {"include_ls", c.mse.include_ls}};
            return j;
        }
    }

    std::string config_to_json(const ExperimentConfig &config, bool include_execution)
    {
        return config_json(config, include_execution).dump(2);
    }

    // ---- Statistics and formatting ----

    namespace
    {
        struct MeanStderr
        {
            double mean = 0.0, stderr_ = 0.0;
        };

        MeanStderr mean_stderr(const std::vector<double> &x)
        {
            MeanStderr r;
            if (x.empty())
                return r;
            r.mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
            if (x.size() > 1)
            {
                double ss = 0.0;
                for (double v : x)
                    ss += (v - r.mean) * (v - r.mean);
                r.stderr_ = std::sqrt(ss / double(x.size() - 1) / double(x.size()));
            }
            return r;
        }

        std::string num(double v)
        {
            if (std::isnan(v))
                return "nan";
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.10g", v);
            return buf;
        }

        // Table with '#' metadata lines and one header row
        class CsvTable
        {
        public:
            void comment(const std::string &line) { out_ << "# " << line << '\n'; }
            void header(const std::vector<std::string> &cols) { row(cols); }
            void row(const std::vector<std::string> &cells)
            {
                for (std::size_t i = 0; i < cells.size(); ++i)
                    out_ << (i ? "," : "") << cells[i];
                out_ << '\n';
            }
            std::string str() const { return out_.str(); }

        private:
            std::ostringstream out_;
        };

        void common_comments(CsvTable &csv, const ExperimentConfig &c)
        {
            csv.comment(std::string("sixdma ") + library_version + " " + to_string(c.kind));
            csv.comment("config: " + config_json(c, false).dump());
        }

        // Tag values that separate the random streams of different experiments
        enum StreamTag : std::uint64_t
        {
            tag_sparsity = 1,
            tag_capacity = 2,
            tag_mse = 3,
            tag_user = 10,
            tag_combiner = 11,
            tag_held_out = 12,
            tag_noise = 13,
            tag_subset = 14
        };
    }

    // ---- Sparsity map ----

    namespace
    {
        struct Output
        {
            json results;
            std::string csv;
        };

        Output run_sparsity_map(const ExperimentConfig &c)
        {
            const auto &s = c.scenario;
            const auto poses = place_candidate_poses(s.M, s.site());
            const auto users = sample_users(s.K, s.region(), s.carrier(), derive_seed(c.seed, {tag_sparsity}));
            const auto map = sparsity_map(users, poses, s.layout(), s.carrier(), s.pattern.build());

            CsvTable csv;
            common_comments(csv, c);
            csv.comment("one row per user; p<m> is the hybrid-field channel power ||h_m||^2 of candidate pose m "
                        "(linear), exactly 0 when the pose cannot see the user");
            csv.comment("columns: user index, distance [m], azimuth [rad], elevation [rad], number of poses with "
                        "non-zero power, then p0 ... p" + std::to_string(s.M - 1));
            std::vector<std::string> head{"user", "distance", "azimuth", "elevation", "visible"};
            for (std::size_t m = 0; m < s.M; ++m)
                head.push_back("p" + std::to_string(m));
            csv.header(head);

            json rows = json::array();
            for (std::size_t k = 0; k < users.size(); ++k)
            {
                const auto visible = map.visible_poses(k);
                std::vector<std::string> cells{std::to_string(k), num(users[k].distance), num(users[k].doa.azimuth),
                                               num(users[k].doa.elevation), std::to_string(visible.size())};
                for (std::size_t m = 0; m < s.M; ++m)
                    cells.push_back(num(map.power(Eigen::Index(k), Eigen::Index(m))));
                csv.row(cells);
                rows.push_back({{"user", k}, {"visible_poses", visible}});
            }

            json layout = json::array();
            for (const auto &p : poses)
                layout.push_back({{"position", {p.position()(0), p.position()(1), p.position()(2)}},
                                  {"rotation", {p.rotation()(0), p.rotation()(1), p.rotation()(2)}}});
            return {{{"users", rows}, {"poses", layout}}, csv.str()};
        }
    }

    // ---- Capacity versus distance ----

    std::vector<CapacityPoint> capacity_vs_distance(const ExperimentConfig &c)
    {
        c.validate();
        const auto &s = c.scenario;
        const auto candidates = place_candidate_poses(s.M, s.site());
        const auto layout = s.layout();
        const auto carrier = s.carrier();
        const auto pattern = s.pattern.build();
        const double tx_power = std::pow(10.0, 0.1 * c.capacity.rho_db);

        std::vector<CapacityPoint> points;
        for (std::size_t di = 0; di < c.capacity.distances.size(); ++di)
        {
            const double d = c.capacity.distances[di];
            std::vector<std::array<double, 3>> per_trial(c.trials);
            parallel_for(c.trials, c.threads, [&](std::size_t t)
                         {
                const std::uint64_t seed = derive_seed(c.seed, {tag_capacity, di, t});

                // Random B-subset of the candidates
                std::mt19937_64 rng(derive_seed(seed, {tag_subset}));
                std::vector<std::size_t> order(s.M);
                std::iota(order.begin(), order.end(), 0);
                for (std::size_t i = 0; i < s.B; ++i)
                {
                    std::uniform_int_distribution<std::size_t> pick(i, s.M - 1);
                    std::swap(order[i], order[pick(rng)]);
                }
                std::vector<SurfacePose> poses;
                for (std::size_t i = 0; i < s.B; ++i)
                    poses.push_back(candidates[order[i]]);

                std::array<Eigen::MatrixXcd, 3> H;
                for (auto &h : H)
                    h.resize(Eigen::Index(s.B * s.N), Eigen::Index(s.K));
                for (std::size_t k = 0; k < s.K; ++k)
                {
                    const auto user = sample_user_at_distance(d, s.region(), carrier, derive_seed(seed, {tag_user, k}));
                    H[0].col(Eigen::Index(k)) = channel_far(poses, layout, user, carrier, pattern).coefficients;
                    H[1].col(Eigen::Index(k)) =
                        channel_near(poses, layout, user, carrier, pattern, s.near_field_gain).coefficients;
                    H[2].col(Eigen::Index(k)) = channel_hybrid(poses, layout, user, carrier, pattern).coefficients;
                }
                for (std::size_t i = 0; i < 3; ++i)
                    per_trial[t][i] = sum_capacity(H[i], 1.0, tx_power); });

            CapacityPoint p;
            p.distance = d;
            p.trials = c.trials;
            std::array<std::vector<double>, 3> cols;
            std::size_t closer = 0;
            for (const auto &r : per_trial)
            {
                for (std::size_t i = 0; i < 3; ++i)
                    cols[i].push_back(r[i]);
                if (std::abs(r[2] - r[1]) < std::abs(r[0] - r[1]))
                    ++closer;
            }
            const auto far = mean_stderr(cols[0]), near = mean_stderr(cols[1]), hyb = mean_stderr(cols[2]);
            p.far = far.mean;
            p.far_stderr = far.stderr_;
            p.near = near.mean;
            p.near_stderr = near.stderr_;
            p.hybrid = hyb.mean;
            p.hybrid_stderr = hyb.stderr_;
            p.hybrid_closer_fraction = double(closer) / double(c.trials);
            points.push_back(p);
        }
        return points;
    }

    namespace
    {
        Output run_capacity(const ExperimentConfig &c)
        {
            const auto points = capacity_vs_distance(c);
            CsvTable csv;
            common_comments(csv, c);
            csv.comment("sum capacity log2 det(I + rho H^H H) in bit/s/Hz, averaged over trials; rho = " +
                        num(c.capacity.rho_db) + " dB; each trial draws a random B-subset of the candidates and K "
                        "users at the given distance");
            csv.comment("hybrid_closer: fraction of trials with |C_hybrid - C_near| < |C_far - C_near|");
            csv.header({"distance", "far", "far_stderr", "near", "near_stderr", "hybrid", "hybrid_stderr",
                        "hybrid_closer", "trials"});
            json rows = json::array();
            for (const auto &p : points)
            {
                csv.row({num(p.distance), num(p.far), num(p.far_stderr), num(p.near), num(p.near_stderr),
                         num(p.hybrid), num(p.hybrid_stderr), num(p.hybrid_closer_fraction), std::to_string(p.trials)});
                rows.push_back({{"distance", p.distance},
                                {"far", {{"mean", p.far}, {"stderr", p.far_stderr}}},
                                {"near", {{"mean", p.near}, {"stderr", p.near_stderr}}},
                                {"hybrid", {{"mean", p.hybrid}, {"stderr", p.hybrid_stderr}}},
                                {"hybrid_closer_fraction", p.hybrid_closer_fraction},
                                {"trials", p.trials}});
            }
            return {{{"points", rows}, {"rayleigh_distance", rayleigh_distance(site_aperture(c.scenario.site()), c.scenario.carrier())}},
                    csv.str()};
        }
    }

    // ---- Channel estimation trials ----

    namespace
    {
        // One user, M measured poses and held-out poses, shared by all SNR points of a trial
        struct EstimationWorld
        {
            UserPathState user;
            std::vector<SurfacePose> poses;
            std::vector<CombinerMatrix> combiners;
            std::vector<Eigen::VectorXcd> channels;
            std::vector<SurfacePose> held_out;
            Eigen::VectorXcd held_out_truth;
            std::uint64_t seed = 0;
        };

        EstimationWorld make_world(const ExperimentConfig &c, std::size_t M, std::size_t trial)
        {
            const auto &s = c.scenario;
            const auto model = s.model();
            EstimationWorld w;
            w.seed = derive_seed(c.seed, {tag_mse, M, trial});
            w.user = sample_users(1, s.region(), model.carrier, derive_seed(w.seed, {tag_user}))[0];
            w.poses = place_candidate_poses(M, s.site());
            for (std::size_t m = 0; m < M; ++m)
            {
                w.combiners.push_back(make_combiner(s.N, s.T, derive_seed(w.seed, {tag_combiner, m})));
                w.channels.push_back(hybrid_pose_channel(w.poses[m], model.layout, w.user, model.carrier, model.pattern));
            }
            w.held_out = random_sphere_poses(c.mse.held_out_poses, s.site(), derive_seed(w.seed, {tag_held_out}));
            w.held_out_truth = channel_hybrid(w.held_out, model.layout, w.user, model.carrier, model.pattern).coefficients;
            return w;
        }

        std::vector<MeasurementBatch> measure_world(const EstimationWorld &w, double snr_db)
        {
            const double sigma2 = noise_variance_for_snr(w.channels, snr_db);
            std::vector<MeasurementBatch> batches;
            for (std::size_t m = 0; m < w.poses.size(); ++m)
                batches.push_back(measure(m, w.poses[m], w.channels[m], w.combiners[m], sigma2,
                                          derive_seed(w.seed, {tag_noise, m})));
            return batches;
        }

        Algorithm1Config algorithm_config(const ExperimentConfig &c, std::size_t threads)
        {
            return {c.grid.coarse, c.grid.fine, c.grid.epsilon.value_or(0.0), threads};
        }

        Eigen::VectorXcd reconstruct_stack(const RefinedEstimate &e, const EstimationWorld &w, const EstimatorModel &model)
        {
            return channel_hybrid(w.held_out, model.layout, e.path(), model.carrier, model.pattern).coefficients;
        }

        struct TrialOutcome
        {
            bool valid = false;
            std::vector<double> alg1, ls;
        };

        TrialOutcome run_trial(const ExperimentConfig &c, std::size_t M, std::size_t trial)
        {
            const auto model = c.scenario.model();
            const EstimationWorld w = make_world(c, M, trial);
            TrialOutcome out;
            if (w.held_out_truth.squaredNorm() == 0.0)
                return out;
            out.valid = true;
            const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(w.held_out_truth.size());
            for (double snr : c.mse.snr_db)
            {
                const auto batches = measure_world(w, snr);
                Eigen::VectorXcd est = zero;
                try
                {
                    est = reconstruct_stack(run_algorithm1(batches, model, algorithm_config(c, 1)).estimate, w, model);
                }
                catch (const DarkCandidateError &)
                {
                    // every fine candidate is dark for the cluster: the estimate stays zero
                }
                catch (const std::runtime_error &)
                {
                    // no usable cluster: the estimate stays zero
                }
                out.alg1.push_back(channel_nmse(est, w.held_out_truth));
                if (c.mse.include_ls)
                {
                    const auto ls = ls_baseline(batches, model, c.grid.coarse, c.grid.fine, 1);
                    out.ls.push_back(channel_nmse(reconstruct_stack(ls, w, model), w.held_out_truth));
                }
            }
            return out;
        }
    }

    std::vector<MsePoint> mse_vs_snr(const ExperimentConfig &c)
    {
        c.validate();
        std::vector<std::size_t> m_values = c.mse.m_values;
        if (m_values.empty())
            m_values.push_back(c.scenario.M);

        std::vector<MsePoint> points;
        for (std::size_t M : m_values)
        {
            std::vector<TrialOutcome> outcomes(c.trials);
            parallel_for(c.trials, c.threads, [&](std::size_t t)
                         { outcomes[t] = run_trial(c, M, t); });

            for (std::size_t i = 0; i < c.mse.snr_db.size(); ++i)
            {
                std::vector<double> a, l;
                for (const auto &o : outcomes)
                    if (o.valid)
                    {
                        a.push_back(o.alg1[i]);
                        if (c.mse.include_ls)
                            l.push_back(o.ls[i]);
                    }
                MsePoint p;
                p.M = M;
                p.snr_db = c.mse.snr_db[i];
                p.trials = a.size();
                const auto ma = mean_stderr(a);
                p.nmse_alg1 = ma.mean;
                p.stderr_alg1 = ma.stderr_;
                if (c.mse.include_ls)
                {
                    const auto ml = mean_stderr(l);
                    p.nmse_ls = ml.mean;
                    p.stderr_ls = ml.stderr_;
                }
                else
                    p.nmse_ls = p.stderr_ls = std::nan("");
                points.push_back(p);
            }
        }
        return points;
    }

    namespace
    {
        const char *snr_note = "SNR = mean over measured poses with non-zero channel of ||h_m||^2 / (N sigma^2)";

        Output run_mse(const ExperimentConfig &c)
        {
            const auto points = mse_vs_snr(c);
            CsvTable csv;
            common_comments(csv, c);
            csv.comment(snr_note);
            csv.comment("NMSE = ||h_hat - h||^2 / ||h||^2 of the hybrid-field channel stacked over " +
                        std::to_string(c.mse.held_out_poses) +
                        " random held-out poses, averaged over trials; alg1 = clustering-based estimator, ls = LS "
                        "baseline");
            csv.header({"M", "snr_db", "nmse_alg1", "stderr_alg1", "nmse_ls", "stderr_ls", "trials"});
            json rows = json::array();
            for (const auto &p : points)
            {
                csv.row({std::to_string(p.M), num(p.snr_db), num(p.nmse_alg1), num(p.stderr_alg1), num(p.nmse_ls),
                         num(p.stderr_ls), std::to_string(p.trials)});
                rows.push_back({{"M", p.M},
                                {"snr_db", p.snr_db},
                                {"nmse_alg1", {{"mean", p.nmse_alg1}, {"stderr", p.stderr_alg1}}},
                                {"nmse_ls", {{"mean", c.mse.include_ls ? json(p.nmse_ls) : json(nullptr)},
                                             {"stderr", c.mse.include_ls ? json(p.stderr_ls) : json(nullptr)}}},
                                {"trials", p.trials}});
            }
            return {{{"points", rows}, {"snr_definition", snr_note}}, csv.str()};
        }

        json candidate_json(const Candidate &p)
        {
            return {{"distance", p.distance}, {"azimuth", p.azimuth}, {"elevation", p.elevation}};
        }

        Output run_single(const ExperimentConfig &c)
        {
            const auto model = c.scenario.model();
            const EstimationWorld w = make_world(c, c.scenario.M, 0);
            const double snr = c.mse.snr_db.front();
            const auto batches = measure_world(w, snr);
            const auto result = run_algorithm1(batches, model, algorithm_config(c, c.threads));
            const auto &diag = result.diagnostics;

            json summary;
            summary["snr_db"] = snr;
            summary["truth"] = {{"distance", w.user.distance},
                                {"azimuth", w.user.doa.azimuth},
                                {"elevation", w.user.doa.elevation},
                                {"path_gain", {w.user.path_gain.real(), w.user.path_gain.imag()}}};
            const auto &e = result.estimate;
            summary["algorithm1"] = {{"estimate", candidate_json(e.polar)},
                                     {"path_gain", {e.path_gain.real(), e.path_gain.imag()}},
                                     {"members", e.pose_indices},
                                     {"clusters", diag.clusters.count()},
                                     {"epsilon", diag.epsilon},
                                     {"coarse_grid_size", diag.coarse_grid_size},
                                     {"fine_grid_size", diag.fine_grid_size},
                                     {"stage1_seconds", diag.stage1_seconds},
                                     {"stage2_seconds", diag.stage2_seconds},
                                     {"nmse", channel_nmse(reconstruct_stack(e, w, model), w.held_out_truth)}};
            if (c.mse.include_ls)
            {
                const auto ls = ls_baseline(batches, model, c.grid.coarse, c.grid.fine, c.threads);
                summary["ls"] = {{"estimate", candidate_json(ls.polar)},
                                 {"path_gain", {ls.path_gain.real(), ls.path_gain.imag()}},
                                 {"nmse", channel_nmse(reconstruct_stack(ls, w, model), w.held_out_truth)}};
            }

            // Cluster id per estimate that entered clustering
            std::vector<long> cluster_of(batches.size(), -1);
            for (std::size_t i = 0; i < diag.clusters.count(); ++i)
                for (auto j : diag.clusters.clusters[i])
                    cluster_of[diag.clustered[j]] = long(i);

            CsvTable csv;
            common_comments(csv, c);
            csv.comment(snr_note + std::string("; snr_db = ") + num(snr));
            csv.comment("one row per measured pose: channel power, coarse estimate, objective value, cluster id "
                        "(-1 if not clustered) and membership of the largest cluster");
            csv.header({"pose", "power", "d_hat", "azimuth_hat", "elevation_hat", "objective", "flagged", "cluster",
                        "in_largest"});
            for (std::size_t m = 0; m < batches.size(); ++m)
            {
                const auto &ce = diag.coarse[m];
                const bool member = std::count(diag.largest.members.begin(), diag.largest.members.end(), m) > 0;
                csv.row({std::to_string(m), num(w.channels[m].squaredNorm()), num(ce.polar.distance),
                         num(ce.polar.azimuth), num(ce.polar.elevation), num(ce.objective), ce.flagged ? "1" : "0",
                         std::to_string(cluster_of[m]), member ? "1" : "0"});
            }
            return {summary, csv.str()};
        }

        void write_atomically(const std::filesystem::path &path, const std::string &content)
        {
            const auto tmp = std::filesystem::path(path.string() + ".tmp");
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                if (!out)
                    throw std::runtime_error("cannot write '" + tmp.string() + "'");
                out << content;
                out.flush();
                if (!out)
                {
                    std::error_code ec;
                    std::filesystem::remove(tmp, ec);
                    throw std::runtime_error("write failed for '" + tmp.string() + "'");
                }
            }
            std::filesystem::rename(tmp, path);
        }
    }

    RunResult run_experiment(ExperimentConfig config, const RunOptions &options)
    {
        if (options.seed)
            config.seed = *options.seed;
        if (options.threads)
            config.threads = *options.threads;
        if (options.output_dir)
            config.output_dir = options.output_dir->string();
        else if (const char *env = std::getenv(output_dir_env); env && *env)
            config.output_dir = env;
        config.validate();

        const bool uses_grid = config.kind == ExperimentKind::mse_vs_snr || config.kind == ExperimentKind::single_run;
        if (uses_grid && !options.allow_huge_grid &&
            (config.grid.coarse.cell_count() > huge_grid_threshold || config.grid.fine.cell_count() > huge_grid_threshold))
            throw ConfigError("grid: " + std::to_string(config.grid.coarse.cell_count()) +
                              " coarse points exceed the safety limit; pass --allow-huge-grid to run anyway");

        const auto t0 = std::chrono::steady_clock::now();
        Output out;
        switch (config.kind)
        {
        case ExperimentKind::sparsity_map:
            out = run_sparsity_map(config);
            break;
        case ExperimentKind::capacity_vs_distance:
            out = run_capacity(config);
            break;
        case ExperimentKind::mse_vs_snr:
            out = run_mse(config);
            break;
        case ExperimentKind::single_run:
            out = run_single(config);
            break;
        }

        RunResult r;
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.csv = out.csv;

        json doc;
        doc["kind"] = to_string(config.kind);
        doc["library_version"] = library_version;
        doc["config"] = config_json(config, true);
        doc["results"] = out.results;
        doc["wall_seconds"] = r.wall_seconds;
        doc["threads_used"] = resolve_threads(config.threads);

        const std::filesystem::path dir(config.output_dir);
        std::filesystem::create_directories(dir);
        r.json_path = dir / (std::string(to_string(config.kind)) + ".json");
        r.csv_path = dir / (std::string(to_string(config.kind)) + ".csv");
        try
        {
            write_atomically(r.csv_path, r.csv);
            write_atomically(r.json_path, doc.dump(2) + "\n");
        }
        catch (...)
        {
            std::error_code ec;
            for (const auto &p : {r.csv_path, r.json_path})
            {
                std::filesystem::remove(p, ec);
                std::filesystem::remove(std::filesystem::path(p.string() + ".tmp"), ec);
            }
            throw;
        }
        return r;
    }
}
