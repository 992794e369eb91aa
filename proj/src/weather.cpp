#include "soilcn/weather.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "soilcn/common.hpp"
#include "soilcn/csv.hpp"

namespace soilcn {

namespace {

constexpr int kMonthDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

constexpr double kPi = 3.14159265358979323846;

double mean_of(const std::vector<double>& v, double fallback) {
    if (v.empty()) return fallback;
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
}

double sd_of(const std::vector<double>& v, double mean, double floor) {
    if (v.size() < 2) return floor;
    double s = 0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::max(std::sqrt(s / (v.size() - 1)), floor);
}

void gamma_moments(const std::vector<double>& amounts, double& shape, double& scale) {
    double m = mean_of(amounts, 1.0);
    double var = 0;
    for (double x : amounts) var += (x - m) * (x - m);
    var = amounts.size() > 1 ? var / (amounts.size() - 1) : 0.0;
    if (var < 1.0e-12 * m * m || amounts.size() < 2) {
        // Degenerate toward the mean: enormous shape, tiny scale.
        shape = 1.0e6;
        scale = m / 1.0e6;
    } else {
        shape = m * m / var;
        scale = var / m;
    }
}

}  // namespace

int month_of_yday(int yday) {
    int d = yday % 365;
    for (int m = 0; m < 12; ++m) {
        if (d < kMonthDays[m]) return m;
        d -= kMonthDays[m];
    }
    return 11;
}

WeatherGenParams fit_generator(const std::vector<DailyWeather>& history) {
    if (history.size() < 2 * 365)
        throw DomainError("weather fit needs at least two full years of history");

    WeatherGenParams out;
    const double thr = out.wet_threshold;

    // Month-stratified tallies.
    struct Tally {
        int dry_prev = 0, dry_to_wet = 0, wet_prev = 0, wet_to_wet = 0;
        int days = 0, wet_days = 0;
        std::vector<double> amounts;
        std::vector<double> tmax[2], tmin[2];  // [dry, wet]
    };
    std::array<Tally, 12> tally;
    std::vector<double> annual_amounts;

    for (size_t i = 0; i < history.size(); ++i) {
        int m = month_of_yday(history[i].day);
        bool wet = history[i].precip > thr;
        Tally& t = tally[m];
        ++t.days;
        if (wet) {
            ++t.wet_days;
            t.amounts.push_back(history[i].precip);
            annual_amounts.push_back(history[i].precip);
        }
        t.tmax[wet].push_back(history[i].t_max);
        t.tmin[wet].push_back(history[i].t_min);
        if (i > 0) {
            bool prev_wet = history[i - 1].precip > thr;
            if (prev_wet) {
                ++t.wet_prev;
                if (wet) ++t.wet_to_wet;
            } else {
                ++t.dry_prev;
                if (wet) ++t.dry_to_wet;
            }
        }
    }

    double annual_shape = 1.0, annual_scale = 1.0;
    gamma_moments(annual_amounts, annual_shape, annual_scale);

    for (int m = 0; m < 12; ++m) {
        Tally& t = tally[m];
        MonthParams& p = out.months[m];
        double wet_frac = t.days ? double(t.wet_days) / t.days : 0.0;
        p.p_wd = t.dry_prev ? double(t.dry_to_wet) / t.dry_prev : wet_frac;
        p.p_ww = t.wet_prev ? double(t.wet_to_wet) / t.wet_prev : wet_frac;
        if (t.amounts.empty()) {
            // No wet day ever observed in this month: fall back to the annual fit.
            p.gamma_shape = annual_shape;
            p.gamma_scale = annual_scale;
        } else {
            gamma_moments(t.amounts, p.gamma_shape, p.gamma_scale);
        }
        for (int w = 0; w < 2; ++w) {
            const auto& all_max = t.tmax[w].empty() ? t.tmax[1 - w] : t.tmax[w];
            const auto& all_min = t.tmin[w].empty() ? t.tmin[1 - w] : t.tmin[w];
            p.tmax_mean[w] = mean_of(all_max, 15.0);
            p.tmax_sd[w] = sd_of(all_max, p.tmax_mean[w], 0.1);
            p.tmin_mean[w] = mean_of(all_min, 5.0);
            p.tmin_sd[w] = sd_of(all_min, p.tmin_mean[w], 0.1);
        }
    }

    // Lag-1 autocorrelation of the standardized tmax residual.
    double num = 0, den = 0;
    double prev_z = 0;
    bool have_prev = false;
    for (const auto& d : history) {
        int m = month_of_yday(d.day);
        bool wet = d.precip > thr;
        const MonthParams& p = out.months[m];
        double z = (d.t_max - p.tmax_mean[wet]) / p.tmax_sd[wet];
        den += z * z;
        if (have_prev) num += z * prev_z;
        prev_z = z;
        have_prev = true;
    }
    out.t_autocorr = den > 0 ? std::clamp(num / den, -0.95, 0.95) : 0.0;
    return out;
}

std::vector<DailyWeather> generate(const WeatherGenParams& params, int years,
                                   uint64_t seed) {
    if (years < 1) throw DomainError("generate needs years >= 1");
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<DailyWeather> out;
    out.reserve(size_t(years) * 365);
    bool wet_prev = false;
    double z = 0.0;
    const double r = params.t_autocorr;
    const double mix = std::sqrt(std::max(0.0, 1.0 - r * r));

    for (int day = 0; day < years * 365; ++day) {
        int m = month_of_yday(day);
        const MonthParams& p = params.months[m];
        bool wet = uniform(rng) < (wet_prev ? p.p_ww : p.p_wd);
        double precip = 0.0;
        if (wet) {
            std::gamma_distribution<double> gamma(p.gamma_shape, p.gamma_scale);
            precip = std::max(gamma(rng), params.wet_threshold + 1.0e-9);
        }
        z = r * z + mix * normal(rng);
        double t_max = p.tmax_mean[wet] + p.tmax_sd[wet] * z;
        double t_min = p.tmin_mean[wet] + p.tmin_sd[wet] * z;
        if (t_min > t_max) t_min = t_max;
        out.push_back({day, precip, t_min, t_max});
        wet_prev = wet;
    }
    return out;
}

double extraterrestrial_radiation(double latitude_deg, int day_of_year) {
    double phi = latitude_deg * kPi / 180.0;
    double j = double(day_of_year);
    double dr = 1.0 + 0.033 * std::cos(2.0 * kPi * j / 365.0);
    double decl = 0.409 * std::sin(2.0 * kPi * j / 365.0 - 1.39);
    double x = std::clamp(-std::tan(phi) * std::tan(decl), -1.0, 1.0);
    double ws = std::acos(x);
    double ra = 15.392 * dr *
                (ws * std::sin(phi) * std::sin(decl) +
                 std::cos(phi) * std::cos(decl) * std::sin(ws));
    return std::max(ra, 0.0);  // equivalent evaporation [mm/day]
}

double et0_hargreaves(double t_min_c, double t_max_c, double latitude_deg,
                      int day_of_year) {
    double ra = extraterrestrial_radiation(latitude_deg, day_of_year);
    double range = std::max(t_max_c - t_min_c, 0.0);
    double t_mean = 0.5 * (t_min_c + t_max_c);
    double et0 = 0.0023 * ra * std::sqrt(range) * (t_mean + 17.8);
    return std::max(et0, 0.0);
}

double et_actual(const DailyWeather& day, double latitude_deg, int day_of_year,
                 double k_c) {
    if (k_c < 0) throw DomainError("k_c must be >= 0");
    return k_c * et0_hargreaves(day.t_min, day.t_max, latitude_deg, day_of_year);
}

std::vector<DailyWeather> read_weather_csv(const std::string& path) {
    CsvTable t = read_csv_file(path);
    int c_date = t.column("date"), c_p = t.column("precip_mm");
    int c_min = t.column("tmin_c"), c_max = t.column("tmax_c");
    if (c_date < 0 || c_p < 0 || c_min < 0 || c_max < 0)
        throw ConfigError("weather CSV needs date,precip_mm,tmin_c,tmax_c: " + path);
    std::vector<DailyWeather> out;
    out.reserve(t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        DailyWeather d;
        d.day = static_cast<int>(i);
        d.precip = std::strtod(row[c_p].c_str(), nullptr);
        d.t_min = std::strtod(row[c_min].c_str(), nullptr);
        d.t_max = std::strtod(row[c_max].c_str(), nullptr);
        if (d.precip < 0) throw ConfigError("negative precipitation in " + path);
        if (d.t_min > d.t_max) throw ConfigError("tmin > tmax in " + path);
        out.push_back(d);
    }
    return out;
}

void write_weather_csv(const std::string& path, const std::vector<DailyWeather>& days,
                       int start_year) {
    CsvTable t;
    t.header = {"date", "precip_mm", "tmin_c", "tmax_c"};
    for (const auto& d : days) {
        int year = start_year + d.day / 365;
        int yday = d.day % 365;
        int m = 0, dom = yday;
        while (dom >= kMonthDays[m]) dom -= kMonthDays[m++];
        char date[16];
        std::snprintf(date, sizeof(date), "%04d-%02d-%02d", year, m + 1, dom + 1);
        t.add_row({date, format_double(d.precip), format_double(d.t_min),
                   format_double(d.t_max)});
    }
    write_csv_file(path, t);
}

std::string weather_params_to_json(const WeatherGenParams& p) {
    nlohmann::json j;
    j["t_autocorr"] = p.t_autocorr;
    j["wet_threshold"] = p.wet_threshold;
    for (const auto& m : p.months) {
        nlohmann::json jm;
        jm["p_wd"] = m.p_wd;
        jm["p_ww"] = m.p_ww;
        jm["gamma_shape"] = m.gamma_shape;
        jm["gamma_scale"] = m.gamma_scale;
        jm["tmax_mean"] = {m.tmax_mean[0], m.tmax_mean[1]};
        jm["tmax_sd"] = {m.tmax_sd[0], m.tmax_sd[1]};
        jm["tmin_mean"] = {m.tmin_mean[0], m.tmin_mean[1]};
        jm["tmin_sd"] = {m.tmin_sd[0], m.tmin_sd[1]};
        j["months"].push_back(jm);
    }
    return j.dump(2) + "\n";
}

WeatherGenParams weather_params_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    WeatherGenParams p;
    p.t_autocorr = j.value("t_autocorr", 0.6);
    p.wet_threshold = j.value("wet_threshold", 0.1);
    auto months = j.at("months");
    if (months.size() != 12) throw ConfigError("weather params need 12 months");
    for (int m = 0; m < 12; ++m) {
        const auto& jm = months[m];
        MonthParams& mp = p.months[m];
        mp.p_wd = jm.at("p_wd");
        mp.p_ww = jm.at("p_ww");
        mp.gamma_shape = jm.at("gamma_shape");
        mp.gamma_scale = jm.at("gamma_scale");
        for (int w = 0; w < 2; ++w) {
            mp.tmax_mean[w] = jm.at("tmax_mean")[w];
            mp.tmax_sd[w] = jm.at("tmax_sd")[w];
            mp.tmin_mean[w] = jm.at("tmin_mean")[w];
            mp.tmin_sd[w] = jm.at("tmin_sd")[w];
        }
    }
    return p;
}

}  // namespace soilcn
