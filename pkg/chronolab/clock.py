import datetime

import pytz
import tzlocal


class Clock(object):
    """A wrapper for managing clock time functions."""

    def now(self):
        return datetime.datetime.now(tz=pytz.utc)

    def seconds_since(self, start):
        """Returns the number of seconds elapsed since a given timestamp.

        Args:
            start: A tz-aware datetime previously returned by now().

        Raises:
            ValueError if start lies in the future.
        """
        elapsed = (self.now() - start).total_seconds()
        if elapsed < 0.0:
            raise ValueError('Start time is in the future: %s' %
                             start.isoformat('T'))
        return elapsed


class LocalClock(Clock):
    """An implementation of Clock that operates in the local time zone."""

    def now(self):
        time_utc = super(LocalClock, self).now()
        return time_utc.astimezone(tzlocal.get_localzone())
