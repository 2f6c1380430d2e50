#pragma acc routine seq
double square(double x);

void update(int n, double *a)
{
    #pragma acc update host(a[0:n])
    a[0] = 1.0;
    #pragma acc wait
    a[1] = 2.0;
    #pragma acc serial loop
    for (int i = 0; i < n; i++) {
        a[i] = a[i] * a[i];
    }
}
