#include <catch_amalgamated.hpp>

#include "avatarkit/io.hpp"
#include "avatarkit/schedule.hpp"

using namespace avatarkit;

TEST_CASE("cosine schedule satisfies every invariant") {
    for (int T : {1, 10, 50, 200}) {
        NoiseSchedule s = NoiseSchedule::cosine(T);
        CHECK(s.alpha[0] == 1.0);
        CHECK(s.sigma[0] == 0.0);
        CHECK(s.alpha[T] <= 0.05);
        for (int t = 0; t <= T; ++t) {
            double vp = s.alpha[t] * s.alpha[t] + s.sigma[t] * s.sigma[t];
            CHECK(std::abs(vp - 1.0) <= 1e-12);
            if (t > 0) {
                CHECK(s.alpha[t] < s.alpha[t - 1]);
                CHECK(s.sigma[t] > s.sigma[t - 1]);
            }
        }
    }
}

TEST_CASE("validate rejects broken schedules") {
    NoiseSchedule s = NoiseSchedule::cosine(10);
    SECTION("alpha0 not one") {
        s.alpha[0] = 0.999;
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    }
    SECTION("vp identity broken") {
        s.sigma[4] += 1e-6;
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    }
    SECTION("non-monotone alpha") {
        std::swap(s.alpha[3], s.alpha[4]);
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    }
    SECTION("terminal alpha too large") {
        NoiseSchedule t;
        t.num_steps = 1;
        t.alpha = {1.0, 0.5};
        t.sigma = {0.0, std::sqrt(1.0 - 0.25)};
        CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    }
}

TEST_CASE("schedule csv round trip") {
    NoiseSchedule s = NoiseSchedule::cosine(50);
    std::string csv = schedule_csv_encode(s);
    NoiseSchedule back = schedule_csv_decode(csv);
    REQUIRE(back.num_steps == s.num_steps);
    for (int t = 0; t <= s.num_steps; ++t) {
        CHECK(back.alpha[t] == s.alpha[t]);
        CHECK(back.sigma[t] == s.sigma[t]);
    }
    CHECK_THROWS_AS(schedule_csv_decode("alpha,sigma\n"), IoError);
}

TEST_CASE("step range checks") {
    NoiseSchedule s = NoiseSchedule::cosine(10);
    CHECK_THROWS_AS(s.check_step(-1), std::out_of_range);
    CHECK_THROWS_AS(s.check_step(11), std::out_of_range);
    CHECK_NOTHROW(s.check_step(0));
    CHECK_NOTHROW(s.check_step(10));
}
