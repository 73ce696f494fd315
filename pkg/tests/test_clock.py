import datetime
import unittest

import mock
import pytz

from chronolab import clock

TIMESTAMP_A = datetime.datetime(2016, 7, 23, 10, 51, 9, 928000, tzinfo=pytz.utc)


class ClockTest(unittest.TestCase):

    def setUp(self):
        self.clock = clock.Clock()

    def test_now_is_timezone_aware(self):
        """now() should always return a tz-aware datetime."""
        self.assertIsNotNone(self.clock.now().tzinfo)

    def test_seconds_since(self):
        with mock.patch.object(self.clock, 'now') as mock_now:
            mock_now.return_value = TIMESTAMP_A + datetime.timedelta(
                seconds=2.5)
            self.assertEqual(2.5, self.clock.seconds_since(TIMESTAMP_A))

    def test_zero_elapsed_time(self):
        with mock.patch.object(self.clock, 'now') as mock_now:
            mock_now.return_value = TIMESTAMP_A
            self.assertEqual(0.0, self.clock.seconds_since(TIMESTAMP_A))

    def test_future_start_raises_ValueError(self):
        with mock.patch.object(self.clock, 'now') as mock_now:
            mock_now.return_value = TIMESTAMP_A
            with self.assertRaises(ValueError):
                self.clock.seconds_since(TIMESTAMP_A +
                                         datetime.timedelta(seconds=1))


class LocalClockTest(unittest.TestCase):

    def test_now_is_timezone_aware(self):
        self.assertIsNotNone(clock.LocalClock().now().tzinfo)
