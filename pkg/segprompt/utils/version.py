import typing as t

FINAL = 'FINAL'
RELEASE_CANDIDATE = 'RC'
PRE_RELEASES = ('ALPHA', 'BETA', RELEASE_CANDIDATE, 'DEV')


class VersionInfo(t.NamedTuple):
    major: int
    minor: int
    patch: int
    state: str = FINAL
    serial: int = 0

    @property
    def is_final(self) -> bool:
        return self.state.upper() == FINAL

    def __str__(self) -> str:
        state = self.state.upper()
        if state != FINAL and state not in PRE_RELEASES:
            raise ValueError(f'{self.state} is not a valid release state')

        number = f'{self.major}.{self.minor}.{self.patch}'
        if self.is_final:
            return number
        return f'{number}-{state}{self.serial}'


__version_info__ = VersionInfo(0, 1, 0, FINAL, 0)
__version__ = str(__version_info__)
